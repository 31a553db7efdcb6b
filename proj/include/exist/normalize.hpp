#pragma once

#include <stdexcept>

#include "exist/linear.hpp"
#include "exist/poly.hpp"

namespace exist {

struct NormalizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Canonical numeric atom "form REL 0". Forms are primitive (integer-scaled,
// coprime) and integer-tightened where every variable is integer-typed, so
// syntactically different comparisons with the same integer point set (x > 0
// versus x - 1 >= 0) collapse to one atom.
struct Atom {
  LinForm form;
  LinRel rel;
  std::string display;
};

// One truth assignment over a block's atoms. `branches` are the feasible
// polyhedra (a disequality among the false atoms splits a region into two
// branches); the rational function is shared across branches.
struct Region {
  std::vector<bool> atom_truth;
  RatFunc fn;
  std::vector<LinearSystem> branches;
};

// All regions for one assignment of the expression's boolean variables.
struct BoolBlock {
  std::vector<bool> bool_assign;
  std::vector<Atom> atoms;
  std::vector<Region> regions;
};

// Piecewise-rational canonical form: boolean variables enumerated outermost,
// then truth assignments over the linear atoms; within a region the source
// expectation equals one rational function.
struct GuardedRationalForm {
  VarTablePtr vars;
  std::vector<int> bool_vars;
  std::vector<BoolBlock> blocks;

  // Total regions across blocks (feasible only).
  int region_count() const;
};

// Normalizes an expectation. Throws NormalizeError when an atomic predicate
// is not linear over int/real/prob variables or when the atom count exceeds
// `atom_cap`.
GuardedRationalForm normalize(const ExprPtr& E, const VarTablePtr& vars, int atom_cap = 12);

// Evaluates the form at a state by locating the state's region. Used by the
// equivalence oracle; throws EvalError on a zero denominator.
Rat eval_form(const GuardedRationalForm& f, const StateR& s);

// True iff the numerator vanishes identically on every feasible branch of
// every region, after substituting equalities implied by the branch
// constraints (so integer boundary regions like n = M - 1 are exact).
bool form_is_identically_zero(const GuardedRationalForm& f);

// Distinct denominator polynomials appearing in the form's regions; callers
// discharge their nonvanishing on the verification domain.
std::vector<Poly> collect_denominators(const GuardedRationalForm& f);

}  // namespace exist
