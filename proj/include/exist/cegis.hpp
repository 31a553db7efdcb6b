#pragma once

#include "exist/model_tree.hpp"
#include "exist/soft_tree.hpp"
#include "exist/verifier.hpp"

namespace exist {

struct RunConfig {
  int nruns = 500;
  int nstates = 500;
  double timeout_sec = 600;
  uint64_t seed = 0;
  SamplingDomain domain;
  VerificationDomain vdomain;  // defaults to `domain`; override independently
  bool vdomain_overridden = false;
  long max_iters = 1000000;
  int cex_copies = 10;
  int feature_cap = 40;
  FitConfig fit;             // exact-mode learner
  TrainHyper train;          // sub-mode learner
  int restarts = 3;          // sub-mode independent seeds
  int max_split_features = 1;  // sub-mode soft-tree depth cap (d <= 3)
  VerifierConfig verifier;
  std::string dump_path;  // when set, the accumulated dataset is written here

  const VerificationDomain& verification_domain() const {
    return vdomain_overridden ? vdomain : domain;
  }
};

struct CandidateRecord {
  std::string kind;     // linear | multiplicative
  std::string scheme;   // int | 1-digit | 2-digit
  int splits = 0;       // internal nodes
  std::string iprime;
  std::string invariant;
  std::string tree;
  std::string status;
  double top_violation = 0;
  std::vector<std::string> counterexamples;  // "state ... violation v"
  std::vector<std::string> side_conditions;
  std::string detail;
};

struct IterationRecord {
  int index = 0;
  long dataset_rows = 0;
  double loss_linear = -1;  // training loss of the fitted/learned tree; -1 when skipped
  double loss_mult = -1;
  std::vector<std::string> warnings;
  std::vector<CandidateRecord> candidates;
  int counterexamples_added = 0;
  std::vector<std::pair<int, double>> curve_linear, curve_mult;  // sub mode training curves
};

struct RunReport {
  std::string program_name;
  std::string mode;  // exact | sub
  std::string post, pre;
  RunConfig config;
  bool verified = false;
  bool timed_out = false;
  std::string invariant;
  Verdict verdict;
  std::vector<IterationRecord> iterations;
  double time_sampling = 0, time_learning = 0, time_verification = 0, time_total = 0;

  // Deterministic JSON (stable key order, shortest round-trip numbers).
  // Timings are wall-clock measurements and the one nondeterministic part of
  // a run; omit_timings drops them for byte-comparison purposes.
  std::string to_json(bool omit_timings = false) const;
};

// The synthesis loop for exact invariants: sample, fit both tree kinds, round
// under every scheme, extract candidates, verify in order (integer schemes
// first, linear before multiplicative), stop at the first verified candidate,
// otherwise feed counterexamples (weighted by copies) plus fresh states back
// into the dataset until the timeout.
RunReport run_exact(const Program& prog, const ExprPtr& postE, const RunConfig& cfg);

// Same loop for sub-invariants: one-iteration datasets, soft-tree training
// with restarts, hardening, rounding, check_sub.
RunReport run_sub(const Program& prog, const ExprPtr& preE, const ExprPtr& postE,
                  const RunConfig& cfg);

// states  ∪  each counterexample repeated `copies` times  ∪  fresh.
std::vector<StateD> augment_states(const std::vector<StateD>& states,
                                   const std::vector<StateD>& cex, int copies,
                                   const std::vector<StateD>& fresh);

}  // namespace exist
