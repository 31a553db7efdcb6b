#pragma once

#include <map>
#include <vector>

#include "exist/ast.hpp"

namespace exist {

// Sparse multivariate polynomial with exact rational coefficients. Exponent
// vectors are indexed by the program variable table; enumerated booleans
// simply never appear.
class Poly {
 public:
  using Exponents = std::vector<int>;
  using Terms = std::map<Exponents, Rat>;

  Poly() : nvars_(0) {}
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, const Rat& c);
  static Poly variable(int nvars, int var);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rat constant_value() const;  // 0 when zero; requires is_constant()

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator-() const;
  Poly pow(int n) const;  // n >= 0

  // Degree of `var`; 0 when absent.
  int degree_in(int var) const;
  int total_degree() const;
  std::vector<int> vars_used() const;

  // True when total degree <= 1.
  bool is_linear() const;

  // Replaces `var` with the linear form  constant + sum coefs[i] * x_i.
  Poly substitute_linear(int var, const std::map<int, Rat>& coefs, const Rat& c) const;

  Rat eval(const StateR& s) const;
  double eval(const StateD& s) const;

  // Conservative range of the polynomial over a box (per-variable closed
  // intervals); exact interval arithmetic on monomials.
  std::pair<Rat, Rat> range_on_box(const std::vector<std::pair<Rat, Rat>>& box) const;

  const Terms& terms() const { return terms_; }
  void add_term(const Exponents& e, const Rat& c);

  std::string to_string(const VarTable& vars) const;

 private:
  int nvars_;
  Terms terms_;
};

// Quotient of polynomials. Denominators are never identically zero; equality
// and sign questions reduce to the numerator once the denominator's sign is
// settled.
struct RatFunc {
  Poly num, den;

  static RatFunc constant(int nvars, const Rat& c);
  static RatFunc variable(int nvars, int var);

  RatFunc operator+(const RatFunc& o) const;
  RatFunc operator-(const RatFunc& o) const;
  RatFunc operator*(const RatFunc& o) const;
  RatFunc operator/(const RatFunc& o) const;  // throws on identically-zero divisor
  RatFunc pow(int n) const;                   // any integer

  Rat eval(const StateR& s) const;  // throws EvalError on zero denominator

  std::string to_string(const VarTable& vars) const;
};

}  // namespace exist
