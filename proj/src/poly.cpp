#include "exist/poly.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "exist/eval.hpp"

namespace exist {

Poly Poly::constant(int nvars, const Rat& c) {
  Poly p(nvars);
  if (c != 0) p.terms_[Exponents(nvars, 0)] = c;
  return p;
}

Poly Poly::variable(int nvars, int var) {
  Poly p(nvars);
  Exponents e(nvars, 0);
  e[var] = 1;
  p.terms_[e] = 1;
  return p;
}

bool Poly::is_constant() const {
  if (terms_.empty()) return true;
  if (terms_.size() > 1) return false;
  const Exponents& e = terms_.begin()->first;
  return std::all_of(e.begin(), e.end(), [](int k) { return k == 0; });
}

Rat Poly::constant_value() const {
  if (terms_.empty()) return Rat(0);
  return terms_.begin()->second;
}

void Poly::add_term(const Exponents& e, const Rat& c) {
  if (c == 0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_[e] = c;
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  for (auto& [e, c] : o.terms_) r.add_term(e, Rat(-c));
  return r;
}

Poly Poly::operator-() const {
  Poly r(nvars_);
  for (auto& [e, c] : terms_) r.terms_[e] = -c;
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r(nvars_);
  for (auto& [e1, c1] : terms_) {
    for (auto& [e2, c2] : o.terms_) {
      Exponents e(nvars_);
      for (int i = 0; i < nvars_; ++i) e[i] = e1[i] + e2[i];
      r.add_term(e, c1 * c2);
    }
  }
  return r;
}

Poly Poly::pow(int n) const {
  if (n < 0) throw std::invalid_argument("Poly::pow: negative exponent");
  Poly r = Poly::constant(nvars_, Rat(1));
  for (int i = 0; i < n; ++i) r = r * *this;
  return r;
}

int Poly::degree_in(int var) const {
  int d = 0;
  for (auto& [e, c] : terms_) d = std::max(d, e[var]);
  return d;
}

int Poly::total_degree() const {
  int d = 0;
  for (auto& [e, c] : terms_) {
    int t = 0;
    for (int k : e) t += k;
    d = std::max(d, t);
  }
  return d;
}

std::vector<int> Poly::vars_used() const {
  std::vector<bool> seen(nvars_, false);
  for (auto& [e, c] : terms_) {
    for (int i = 0; i < nvars_; ++i) {
      if (e[i] > 0) seen[i] = true;
    }
  }
  std::vector<int> out;
  for (int i = 0; i < nvars_; ++i) {
    if (seen[i]) out.push_back(i);
  }
  return out;
}

bool Poly::is_linear() const { return total_degree() <= 1; }

Poly Poly::substitute_linear(int var, const std::map<int, Rat>& coefs, const Rat& c) const {
  Poly repl = Poly::constant(nvars_, c);
  for (auto& [v, a] : coefs) {
    if (a != 0) repl = repl + Poly::variable(nvars_, v) * Poly::constant(nvars_, a);
  }
  Poly out(nvars_);
  for (auto& [e, coef] : terms_) {
    Poly term = Poly::constant(nvars_, coef);
    for (int i = 0; i < nvars_; ++i) {
      if (e[i] == 0) continue;
      term = term * (i == var ? repl.pow(e[i]) : Poly::variable(nvars_, i).pow(e[i]));
    }
    out = out + term;
  }
  return out;
}

Rat Poly::eval(const StateR& s) const {
  Rat out = 0;
  for (auto& [e, c] : terms_) {
    Rat t = c;
    for (int i = 0; i < nvars_; ++i) {
      for (int k = 0; k < e[i]; ++k) t *= s[i];
    }
    out += t;
  }
  return out;
}

double Poly::eval(const StateD& s) const {
  double out = 0;
  for (auto& [e, c] : terms_) {
    double t = rat_to_double(c);
    for (int i = 0; i < nvars_; ++i) {
      for (int k = 0; k < e[i]; ++k) t *= s[i];
    }
    out += t;
  }
  return out;
}

std::pair<Rat, Rat> Poly::range_on_box(const std::vector<std::pair<Rat, Rat>>& box) const {
  Rat lo = 0, hi = 0;
  for (auto& [e, c] : terms_) {
    Rat tlo = c, thi = c;
    for (int i = 0; i < nvars_; ++i) {
      for (int k = 0; k < e[i]; ++k) {
        Rat a = tlo * box[i].first, b = tlo * box[i].second;
        Rat c2 = thi * box[i].first, d2 = thi * box[i].second;
        tlo = std::min(std::min(a, b), std::min(c2, d2));
        thi = std::max(std::max(a, b), std::max(c2, d2));
      }
    }
    lo += tlo;
    hi += thi;
  }
  return {lo, hi};
}

std::string Poly::to_string(const VarTable& vars) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << rat_to_pretty_string(c);
    for (int i = 0; i < nvars_; ++i) {
      for (int k = 0; k < e[i]; ++k) os << "*" << vars.names[i];
    }
  }
  return os.str();
}

RatFunc RatFunc::constant(int nvars, const Rat& c) {
  return {Poly::constant(nvars, c), Poly::constant(nvars, Rat(1))};
}

RatFunc RatFunc::variable(int nvars, int var) {
  return {Poly::variable(nvars, var), Poly::constant(nvars, Rat(1))};
}

RatFunc RatFunc::operator+(const RatFunc& o) const {
  return {num * o.den + o.num * den, den * o.den};
}

RatFunc RatFunc::operator-(const RatFunc& o) const {
  return {num * o.den - o.num * den, den * o.den};
}

RatFunc RatFunc::operator*(const RatFunc& o) const { return {num * o.num, den * o.den}; }

RatFunc RatFunc::operator/(const RatFunc& o) const {
  if (o.num.is_zero()) throw EvalError("division by identically-zero expression");
  return {num * o.den, den * o.num};
}

RatFunc RatFunc::pow(int n) const {
  if (n >= 0) return {num.pow(n), den.pow(n)};
  if (num.is_zero()) throw EvalError("negative power of identically-zero expression");
  return {den.pow(-n), num.pow(-n)};
}

Rat RatFunc::eval(const StateR& s) const {
  Rat d = den.eval(s);
  if (d == 0) throw EvalError("division by zero in rational form");
  return num.eval(s) / d;
}

std::string RatFunc::to_string(const VarTable& vars) const {
  std::string d = den.to_string(vars);
  if (d == "1") return num.to_string(vars);
  return "(" + num.to_string(vars) + ") / (" + d + ")";
}

}  // namespace exist
