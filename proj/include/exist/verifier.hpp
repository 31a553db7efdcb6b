#pragma once

#include "exist/normalize.hpp"
#include "exist/sampler.hpp"
#include "exist/wpe.hpp"

namespace exist {

// Bounded ranges used for counterexample search and numeric (bounded)
// verification; defaults mirror the sampling domain and can be overridden
// independently.
using VerificationDomain = SamplingDomain;

enum class VerdictStatus { VerifiedExact, VerifiedBounded, Refuted };

std::string verdict_status_name(VerdictStatus s);

struct Counterexample {
  StateD state;
  double violation;  // strictly positive, re-checkable by evaluation
};

struct Verdict {
  VerdictStatus status = VerdictStatus::Refuted;
  std::vector<Counterexample> counterexamples;  // nonempty iff Refuted
  std::vector<std::string> side_conditions;     // denominator signs, domain bounds used
  std::string detail;                           // region-level summary for reports
  double numeric_bound = 0;  // best violation seen by the search (Bounded verdicts)
};

struct VerifierConfig {
  int atom_cap = 12;
  double tolerance = 1e-8;   // numeric pass threshold; smaller violations are noise
  int cex_count = 5;         // counterexamples returned per refuted candidate
  int search_samples = 512;  // random starts scanned
  int search_climbers = 16;  // starts refined by hill climbing
};

// Exact-invariant check: inv = [G] * wpe(body, inv) + [!G] * postE.
// The difference is normalized to guarded rational form; every feasible
// region must have an identically-zero numerator (exact rationals, implied
// integer equalities substituted). Denominators must be sign-definite on the
// domain (recorded as side conditions). When the exact path is unavailable,
// the numeric search either exhibits violations (Refuted) or bounds |D| by
// the tolerance (VerifiedBounded).
Verdict check_exact(const ExprPtr& inv, const Program& prog, const ExprPtr& postE,
                    const VerificationDomain& dom, const VerifierConfig& cfg = {},
                    uint64_t seed = 0);

// Sub-invariant check: preE <= inv and [G] * inv <= [G] * wpe(body, inv).
// Per region the proof ladder is: zero numerator, constant sign, exact
// Fourier-Motzkin maximization of a linear numerator (first over the region
// alone, then over region intersected with the domain box, recorded as a side
// condition). Nonlinear regions fall back to the numeric search.
Verdict check_sub(const ExprPtr& inv, const Program& prog, const ExprPtr& preE,
                  const ExprPtr& postE, const VerificationDomain& dom,
                  const VerifierConfig& cfg = {}, uint64_t seed = 0);

// Multi-start maximization of D over the domain: random scan, then
// coordinate-wise hill climbing (unit steps for ints and bools,
// golden-section for reals and probs). Returns up to k distinct states with
// strictly positive value, sorted by descending violation.
std::vector<Counterexample> find_counterexamples(const ExprPtr& D, const Program& prog,
                                                 const VerificationDomain& dom, int k,
                                                 const RandomStream& rng,
                                                 const VerifierConfig& cfg = {});

// Per-region polynomial identity between two expectations (used by benchmark
// acceptance: the synthesized invariant must equal the table entry).
bool expectations_semantically_equal(const ExprPtr& a, const ExprPtr& b, const VarTablePtr& vars,
                                     int atom_cap = 12);

// Exact interval bound box for the domain, per variable type.
std::vector<std::pair<Rat, Rat>> box_from_domain(const VarTable& vars,
                                                 const VerificationDomain& dom);

// Sign of the polynomial over the box: +1 positive, -1 negative, 0 unknown.
// Exact interval arithmetic with recursive bisection.
int sign_definite_on_box(const Poly& p, const std::vector<std::pair<Rat, Rat>>& box,
                         int depth = 10);

}  // namespace exist
