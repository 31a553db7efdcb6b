#pragma once

#include <string>
#include <vector>

#include "exist/ast.hpp"
#include "exist/rng.hpp"

namespace exist {

// Per-type sampling ranges. Probabilities are kept away from 0 and 1 so loop
// lengths and variances stay moderate and user features like 1/p are safe.
struct SamplingDomain {
  double p_lo = 0.1, p_hi = 0.9;
  long long n_lo = 0, n_hi = 10;
  double x_lo = 0.0, x_hi = 10.0;

  void validate() const;
  // "prob=0.1:0.9,int=0:10,real=0:10" — any subset of the three keys.
  static SamplingDomain parse(const std::string& spec);
  std::string to_string() const;
};

struct ExactRow {
  StateD state;
  double v;  // empirical mean of postE at termination
  int trials;
};

struct ExactDataset {
  std::vector<ExactRow> rows;
};

struct SubRow {
  StateD state;
  bool guard_true;
  std::vector<StateD> succs;  // empty iff the guard was false
};

struct SubDataset {
  std::vector<SubRow> rows;
};

// nstates states, every variable drawn independently and uniformly from its
// type's range. Deterministic under the seed carried by rng.
std::vector<StateD> sample_states(const Program& prog, int nstates, const SamplingDomain& dom,
                                  const RandomStream& rng);

// Runs the loop to termination `nruns` times from every guard-true state and
// records the empirical mean of postE; guard-false states are skipped (their
// loss contribution is identically zero). The OpenMP kernel and the serial
// reference produce bitwise-identical datasets: each (state, trial) pair uses
// its own substream and per-state means are reduced in trial order.
ExactDataset sample_traces_exact(const Program& prog, const ExprPtr& postE,
                                 const std::vector<StateD>& states, int nruns, long max_iters,
                                 const RandomStream& rng);
ExactDataset sample_traces_exact_serial(const Program& prog, const ExprPtr& postE,
                                        const std::vector<StateD>& states, int nruns,
                                        long max_iters, const RandomStream& rng);

// One body execution per trial; guard-false states keep an empty successor
// multiset (err2 short-circuits on them but they must stay representable).
SubDataset sample_traces_sub(const Program& prog, const std::vector<StateD>& states, int nruns,
                             const RandomStream& rng);
SubDataset sample_traces_sub_serial(const Program& prog, const std::vector<StateD>& states,
                                    int nruns, const RandomStream& rng);

// Line-oriented text formats for offline inspection.
std::string dataset_to_text(const ExactDataset& d, const VarTable& vars);
std::string dataset_to_text(const SubDataset& d, const VarTable& vars);

}  // namespace exist
