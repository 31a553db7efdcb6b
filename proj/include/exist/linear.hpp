#pragma once

#include <map>
#include <optional>
#include <vector>

#include "exist/ast.hpp"
#include "exist/poly.hpp"

namespace exist {

// Linear form  constant + sum coef[v] * x_v  with exact coefficients.
struct LinForm {
  std::map<int, Rat> coef;
  Rat constant;

  bool is_constant() const { return coef.empty(); }
  LinForm operator+(const LinForm& o) const;
  LinForm operator-(const LinForm& o) const;
  LinForm scaled(const Rat& k) const;
  Rat eval(const StateR& s) const;
  double eval(const StateD& s) const;
  Poly to_poly(int nvars) const;
  std::string to_string(const VarTable& vars) const;
  bool operator==(const LinForm& o) const { return constant == o.constant && coef == o.coef; }
  bool operator<(const LinForm& o) const;
};

// Constraint "form REL 0".
enum class LinRel { Le, Lt, Eq };

struct LinConstraint {
  LinForm form;
  LinRel rel;
};

struct MaxResult {
  bool feasible = true;
  bool bounded = false;
  Rat value;    // supremum when bounded
  bool strict;  // supremum not attained (derived through a strict bound)
};

// Conjunction of linear constraints over the program's numeric variables,
// solved exactly with Fourier-Motzkin elimination. Equalities are eliminated
// by substitution first; constraints whose variables are all integer-typed
// are tightened (strict bounds shifted, gcd rounding) so that feasibility and
// optima refer to the integer points wherever that is sound.
class LinearSystem {
 public:
  explicit LinearSystem(const VarTablePtr& vars) : vars_(vars) {}

  void add(const LinConstraint& c);
  void add(const LinForm& form, LinRel rel) { add(LinConstraint{form, rel}); }

  // 0 <= p <= 1 for every prob-typed variable; free to assert always.
  void add_prob_type_bounds();

  const std::vector<LinConstraint>& constraints() const { return cs_; }
  const VarTablePtr& vars() const { return vars_; }

  bool feasible() const;

  // Supremum of a linear objective subject to the constraints.
  MaxResult maximize(const LinForm& objective) const;

  // Exact value of the form when the constraints pin it; nullopt otherwise.
  std::optional<Rat> pinned_value(const LinForm& form) const;

 private:
  VarTablePtr vars_;
  std::vector<LinConstraint> cs_;
};

// Rewrites a constraint over integer-typed variables to an equivalent
// non-strict integer-tight form; returns the input unchanged otherwise.
LinConstraint tighten_int_constraint(const LinConstraint& c, const VarTable& vars);

// Linear-form extraction from an expression; nullopt when nonlinear or when
// it contains indicators/divisions by non-constants.
std::optional<LinForm> extract_linear(const ExprPtr& e, const VarTable& vars);

// Substitutes equalities implied by the system (pinned variables and pinned
// constraint forms) into the polynomial; used before identity and sign tests
// so that integer boundary regions are decided exactly.
Poly reduce_poly_by_implied_equalities(Poly p, const LinearSystem& sys);

}  // namespace exist
