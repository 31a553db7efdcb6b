#include "exist/linear.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace exist {

LinForm LinForm::operator+(const LinForm& o) const {
  LinForm r = *this;
  r.constant += o.constant;
  for (auto& [v, c] : o.coef) {
    Rat& slot = r.coef[v];
    slot += c;
    if (slot == 0) r.coef.erase(v);
  }
  return r;
}

LinForm LinForm::operator-(const LinForm& o) const { return *this + o.scaled(Rat(-1)); }

LinForm LinForm::scaled(const Rat& k) const {
  LinForm r;
  if (k == 0) return r;
  r.constant = constant * k;
  for (auto& [v, c] : coef) r.coef[v] = c * k;
  return r;
}

Rat LinForm::eval(const StateR& s) const {
  Rat out = constant;
  for (auto& [v, c] : coef) out += c * s[v];
  return out;
}

double LinForm::eval(const StateD& s) const {
  double out = rat_to_double(constant);
  for (auto& [v, c] : coef) out += rat_to_double(c) * s[v];
  return out;
}

Poly LinForm::to_poly(int nvars) const {
  Poly p = Poly::constant(nvars, constant);
  for (auto& [v, c] : coef) p = p + Poly::variable(nvars, v) * Poly::constant(nvars, c);
  return p;
}

std::string LinForm::to_string(const VarTable& vars) const {
  std::ostringstream os;
  bool first = true;
  for (auto& [v, c] : coef) {
    if (!first) os << " + ";
    first = false;
    os << rat_to_pretty_string(c) << "*" << vars.names[v];
  }
  if (first || constant != 0) {
    if (!first) os << " + ";
    os << rat_to_pretty_string(constant);
  }
  return os.str();
}

bool LinForm::operator<(const LinForm& o) const {
  if (constant != o.constant) return constant < o.constant;
  return std::lexicographical_compare(
      coef.begin(), coef.end(), o.coef.begin(), o.coef.end(), [](auto& a, auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
      });
}

LinConstraint tighten_int_constraint(const LinConstraint& c, const VarTable& vars) {
  if (c.form.coef.empty()) return c;
  for (auto& [v, _] : c.form.coef) {
    VarType t = vars.types[v];
    if (t != VarType::Int && t != VarType::Bool) return c;
  }
  // Scale so the variable coefficients are coprime integers.
  BigInt lcm = 1;
  for (auto& [v, a] : c.form.coef) {
    BigInt d = denominator(a);
    lcm = lcm / gcd(lcm, d) * d;
  }
  BigInt g = 0;
  for (auto& [v, a] : c.form.coef) g = gcd(g, BigInt(numerator(Rat(a * lcm))));
  if (g == 0) return c;
  Rat scale = Rat(lcm, g);
  LinForm f = c.form.scaled(scale);  // integer coefficients, gcd 1
  Rat k = f.constant;               // possibly fractional
  switch (c.rel) {
    case LinRel::Le: {
      // sum a_i x_i <= -k  with integral lhs  =>  <= floor(-k)
      f.constant = -Rat(rat_floor(Rat(-k)));
      return {f, LinRel::Le};
    }
    case LinRel::Lt: {
      // sum a_i x_i < -k  =>  <= ceil(-k) - 1
      f.constant = -Rat(rat_ceil(Rat(-k)) - 1);
      return {f, LinRel::Le};
    }
    case LinRel::Eq:
      if (denominator(k) != 1) {
        // No integer point satisfies it; encode an explicit contradiction.
        LinForm bad;
        bad.constant = 1;
        return {bad, LinRel::Le};
      }
      return {f, LinRel::Eq};
  }
  return c;
}

void LinearSystem::add(const LinConstraint& c) {
  cs_.push_back(tighten_int_constraint(c, *vars_));
}

void LinearSystem::add_prob_type_bounds() {
  for (int v = 0; v < vars_->size(); ++v) {
    if (vars_->types[v] != VarType::Prob) continue;
    LinForm lo;  // -p <= 0
    lo.coef[v] = -1;
    add(LinConstraint{lo, LinRel::Le});
    LinForm hi;  // p - 1 <= 0
    hi.coef[v] = 1;
    hi.constant = -1;
    add(LinConstraint{hi, LinRel::Le});
  }
}

namespace {

// Core Fourier-Motzkin pass over Le/Lt constraints (equalities already
// substituted away). Returns false on a constant contradiction.
bool fm_eliminate_all(std::vector<LinConstraint> cs, std::vector<LinConstraint>* residual) {
  // Gather variables present.
  std::set<int> vars;
  for (auto& c : cs) {
    for (auto& [v, a] : c.form.coef) vars.insert(v);
  }
  for (int v : vars) {
    std::vector<LinConstraint> lower, upper, rest;
    for (auto& c : cs) {
      auto it = c.form.coef.find(v);
      if (it == c.form.coef.end()) {
        rest.push_back(c);
      } else if (it->second > 0) {
        upper.push_back(c);  // a x + r REL 0, a > 0  =>  x <= -r/a
      } else {
        lower.push_back(c);
      }
    }
    for (auto& lo : lower) {
      for (auto& up : upper) {
        Rat al = lo.form.coef.at(v);  // negative
        Rat au = up.form.coef.at(v);  // positive
        // Combine to eliminate x: au * lo - al * up has no x.
        LinForm combo = lo.form.scaled(au) - up.form.scaled(al);
        combo.coef.erase(v);
        LinRel rel = (lo.rel == LinRel::Lt || up.rel == LinRel::Lt) ? LinRel::Lt : LinRel::Le;
        if (combo.coef.empty()) {
          if (combo.constant > 0 || (rel == LinRel::Lt && combo.constant == 0)) return false;
        } else {
          rest.push_back({combo, rel});
        }
      }
    }
    cs = std::move(rest);
  }
  for (auto& c : cs) {
    if (!c.form.coef.empty()) continue;  // eliminated lazily above
    if (c.form.constant > 0 || (c.rel == LinRel::Lt && c.form.constant == 0)) return false;
  }
  if (residual) *residual = std::move(cs);
  return true;
}

// Substitutes equalities; false on contradiction. Output has Le/Lt only.
bool substitute_equalities(const std::vector<LinConstraint>& in, const VarTable& vars,
                           std::vector<LinConstraint>* out) {
  std::vector<LinConstraint> work = in;
  for (size_t i = 0; i < work.size(); ++i) {
    if (work[i].rel != LinRel::Eq) continue;
    LinForm eq = work[i].form;
    if (eq.coef.empty()) {
      if (eq.constant != 0) return false;
      work[i].rel = LinRel::Le;
      work[i].form = LinForm{};
      continue;
    }
    int v = eq.coef.begin()->first;
    Rat a = eq.coef.begin()->second;
    // x_v = -(eq - a x_v) / a
    LinForm rhs = eq;
    rhs.coef.erase(v);
    rhs = rhs.scaled(Rat(-1) / a);
    for (size_t j = 0; j < work.size(); ++j) {
      if (j == i) continue;
      auto it = work[j].form.coef.find(v);
      if (it == work[j].form.coef.end()) continue;
      Rat b = it->second;
      work[j].form.coef.erase(v);
      work[j].form = work[j].form + rhs.scaled(b);
      work[j] = tighten_int_constraint(work[j], vars);
    }
    // Equality consumed; drop it.
    work[i].rel = LinRel::Le;
    work[i].form = LinForm{};
  }
  out->clear();
  for (auto& c : work) {
    if (c.form.coef.empty() && c.form.constant == 0 && c.rel == LinRel::Le) continue;
    out->push_back(c);
  }
  return true;
}

}  // namespace

bool LinearSystem::feasible() const {
  std::vector<LinConstraint> flat;
  if (!substitute_equalities(cs_, *vars_, &flat)) return false;
  return fm_eliminate_all(std::move(flat), nullptr);
}

MaxResult LinearSystem::maximize(const LinForm& objective) const {
  MaxResult r;
  std::vector<LinConstraint> flat;
  if (!substitute_equalities(cs_, *vars_, &flat)) {
    r.feasible = false;
    return r;
  }
  // Encode t = objective with a fresh variable index, then eliminate all
  // original variables; the residual constraints bound t.
  int t = vars_->size();
  LinForm def = objective;
  def.coef[t] = -1;
  // t - obj <= 0 and obj - t <= 0
  flat.push_back({def.scaled(Rat(-1)), LinRel::Le});
  flat.push_back({def, LinRel::Le});

  // Eliminate everything except t.
  std::set<int> vars;
  for (auto& c : flat) {
    for (auto& [v, a] : c.form.coef) {
      if (v != t) vars.insert(v);
    }
  }
  std::vector<LinConstraint> cs = std::move(flat);
  for (int v : vars) {
    std::vector<LinConstraint> lower, upper, rest;
    for (auto& c : cs) {
      auto it = c.form.coef.find(v);
      if (it == c.form.coef.end()) {
        rest.push_back(c);
      } else if (it->second > 0) {
        upper.push_back(c);
      } else {
        lower.push_back(c);
      }
    }
    for (auto& lo : lower) {
      for (auto& up : upper) {
        Rat al = lo.form.coef.at(v);
        Rat au = up.form.coef.at(v);
        LinForm combo = lo.form.scaled(au) - up.form.scaled(al);
        combo.coef.erase(v);
        LinRel rel = (lo.rel == LinRel::Lt || up.rel == LinRel::Lt) ? LinRel::Lt : LinRel::Le;
        if (combo.coef.empty()) {
          if (combo.constant > 0 || (rel == LinRel::Lt && combo.constant == 0)) {
            r.feasible = false;
            return r;
          }
        } else {
          rest.push_back({combo, rel});
        }
      }
    }
    cs = std::move(rest);
  }
  bool has_upper = false;
  Rat best;
  bool strict = false;
  for (auto& c : cs) {
    auto it = c.form.coef.find(t);
    if (it == c.form.coef.end()) {
      if (c.form.constant > 0 || (c.rel == LinRel::Lt && c.form.constant == 0)) {
        r.feasible = false;
        return r;
      }
      continue;
    }
    Rat a = it->second;
    Rat bound = -c.form.constant / a;
    if (a > 0) {
      // t <= bound
      if (!has_upper || bound < best || (bound == best && c.rel == LinRel::Lt)) {
        if (!has_upper || bound < best) strict = c.rel == LinRel::Lt;
        else strict = strict || c.rel == LinRel::Lt;
        best = bound;
        has_upper = true;
      }
    }
  }
  // Cross-check lower vs upper bounds on t for feasibility.
  for (auto& c : cs) {
    auto it = c.form.coef.find(t);
    if (it == c.form.coef.end() || it->second >= 0) continue;
    Rat lo_bound = -c.form.constant / it->second;
    if (has_upper) {
      if (lo_bound > best || (lo_bound == best && (strict || c.rel == LinRel::Lt))) {
        r.feasible = false;
        return r;
      }
    }
  }
  r.feasible = true;
  r.bounded = has_upper;
  if (has_upper) {
    r.value = best;
    r.strict = strict;
  }
  return r;
}

std::optional<Rat> LinearSystem::pinned_value(const LinForm& form) const {
  MaxResult hi = maximize(form);
  if (!hi.feasible || !hi.bounded || hi.strict) return std::nullopt;
  MaxResult lo = maximize(form.scaled(Rat(-1)));
  if (!lo.feasible || !lo.bounded || lo.strict) return std::nullopt;
  if (hi.value == -lo.value) return hi.value;
  return std::nullopt;
}

std::optional<LinForm> extract_linear(const ExprPtr& e, const VarTable& vars) {
  switch (e->kind) {
    case Expr::Kind::Const: {
      LinForm f;
      f.constant = e->value;
      return f;
    }
    case Expr::Kind::Var: {
      LinForm f;
      f.coef[e->var] = 1;
      return f;
    }
    case Expr::Kind::Add: {
      auto a = extract_linear(e->lhs, vars);
      auto b = extract_linear(e->rhs, vars);
      if (!a || !b) return std::nullopt;
      return *a + *b;
    }
    case Expr::Kind::Sub: {
      auto a = extract_linear(e->lhs, vars);
      auto b = extract_linear(e->rhs, vars);
      if (!a || !b) return std::nullopt;
      return *a - *b;
    }
    case Expr::Kind::Mul: {
      auto a = extract_linear(e->lhs, vars);
      auto b = extract_linear(e->rhs, vars);
      if (!a || !b) return std::nullopt;
      if (a->is_constant()) return b->scaled(a->constant);
      if (b->is_constant()) return a->scaled(b->constant);
      return std::nullopt;
    }
    case Expr::Kind::Div: {
      auto a = extract_linear(e->lhs, vars);
      auto b = extract_linear(e->rhs, vars);
      if (!a || !b || !b->is_constant() || b->constant == 0) return std::nullopt;
      return a->scaled(Rat(1) / b->constant);
    }
    case Expr::Kind::Pow: {
      auto a = extract_linear(e->lhs, vars);
      if (!a) return std::nullopt;
      if (e->exponent == 1) return a;
      if (e->exponent == 0) {
        LinForm f;
        f.constant = 1;
        return f;
      }
      if (a->is_constant() && !(a->constant == 0 && e->exponent < 0)) {
        Rat r = 1;
        int k = std::abs(e->exponent);
        for (int i = 0; i < k; ++i) r *= a->constant;
        LinForm f;
        f.constant = e->exponent < 0 ? Rat(1) / r : r;
        return f;
      }
      return std::nullopt;
    }
    case Expr::Kind::Indicator: return std::nullopt;
  }
  return std::nullopt;
}

Poly reduce_poly_by_implied_equalities(Poly p, const LinearSystem& sys) {
  if (p.is_zero()) return p;
  // Candidate forms: each single variable of the polynomial, then each
  // constraint form. A form pinned to a constant yields an equality we can
  // substitute into the polynomial.
  for (int round = 0; round < 4 && !p.is_zero() && !p.is_constant(); ++round) {
    bool changed = false;
    for (int v : p.vars_used()) {
      LinForm f;
      f.coef[v] = 1;
      auto pin = sys.pinned_value(f);
      if (pin) {
        p = p.substitute_linear(v, {}, *pin);
        changed = true;
      }
    }
    if (p.is_zero() || p.is_constant()) break;
    for (auto& c : sys.constraints()) {
      if (c.form.coef.size() < 2) continue;
      auto pin = sys.pinned_value(c.form);
      if (!pin) continue;
      // Solve the pinned form for the first variable that the polynomial uses.
      int target = -1;
      for (auto& [v, a] : c.form.coef) {
        if (p.degree_in(v) > 0) {
          target = v;
          break;
        }
      }
      if (target < 0) continue;
      Rat a = c.form.coef.at(target);
      // form = pin  =>  x = (pin - constant - rest) / a
      std::map<int, Rat> coefs;
      for (auto& [v, b] : c.form.coef) {
        if (v != target) coefs[v] = -b / a;
      }
      Rat cst = (*pin - c.form.constant) / a;
      p = p.substitute_linear(target, coefs, cst);
      changed = true;
    }
    if (!changed) break;
  }
  return p;
}

}  // namespace exist
