#include "exist/normalize.hpp"

#include <map>
#include <set>

#include "exist/eval.hpp"

namespace exist {

namespace {

struct CmpUse {
  int atom = -1;
  bool negated = false;  // only for != uses
  bool folded = false;
  bool folded_value = false;
};

struct AtomCollector {
  const VarTablePtr& vars;
  int cap;
  std::vector<Atom> atoms;
  std::map<const BoolExpr*, CmpUse> uses;

  AtomCollector(const VarTablePtr& v, int cap) : vars(v), cap(cap) {}

  static LinForm make_primitive(LinForm f, bool canonical_sign) {
    if (f.coef.empty()) return f;
    BigInt lcm = denominator(f.constant);
    for (auto& [v, a] : f.coef) {
      BigInt d = denominator(a);
      lcm = lcm / gcd(lcm, d) * d;
    }
    BigInt g = 0;
    for (auto& [v, a] : f.coef) g = gcd(g, BigInt(numerator(Rat(a * lcm))));
    if (g == 0) return f;
    Rat scale = Rat(lcm, g);
    f = f.scaled(scale);
    if (canonical_sign && f.coef.begin()->second < 0) f = f.scaled(Rat(-1));
    return f;
  }

  int intern(LinForm form, LinRel rel, const std::string& display) {
    if (rel == LinRel::Eq) {
      form = make_primitive(std::move(form), true);
    } else {
      LinConstraint t = tighten_int_constraint({form, rel}, *vars);
      form = make_primitive(std::move(t.form), false);
      rel = t.rel;
    }
    for (size_t i = 0; i < atoms.size(); ++i) {
      if (atoms[i].rel == rel && atoms[i].form == form) return static_cast<int>(i);
    }
    if (static_cast<int>(atoms.size()) + 1 > cap) {
      throw NormalizeError("atom cap exceeded while normalizing (region explosion)");
    }
    atoms.push_back({std::move(form), rel, display});
    return static_cast<int>(atoms.size()) - 1;
  }

  void visit_bool(const BoolPtr& b) {
    switch (b->kind) {
      case BoolExpr::Kind::Const: return;
      case BoolExpr::Kind::Cmp: {
        if (uses.count(b.get())) return;
        auto la = extract_linear(b->a, *vars);
        auto lb = extract_linear(b->b, *vars);
        if (!la || !lb) {
          throw NormalizeError("atomic predicate is not linear: " + to_string(b));
        }
        LinForm diff = *la - *lb;
        CmpUse use;
        if (diff.coef.empty()) {
          use.folded = true;
          Rat c = diff.constant;
          switch (b->op) {
            case CmpOp::Lt: use.folded_value = c < 0; break;
            case CmpOp::Le: use.folded_value = c <= 0; break;
            case CmpOp::Eq: use.folded_value = c == 0; break;
            case CmpOp::Ne: use.folded_value = c != 0; break;
            case CmpOp::Gt: use.folded_value = c > 0; break;
            case CmpOp::Ge: use.folded_value = c >= 0; break;
          }
        } else {
          switch (b->op) {
            case CmpOp::Lt: use.atom = intern(diff, LinRel::Lt, to_string(b)); break;
            case CmpOp::Le: use.atom = intern(diff, LinRel::Le, to_string(b)); break;
            case CmpOp::Gt: use.atom = intern(diff.scaled(Rat(-1)), LinRel::Lt, to_string(b)); break;
            case CmpOp::Ge: use.atom = intern(diff.scaled(Rat(-1)), LinRel::Le, to_string(b)); break;
            case CmpOp::Eq: use.atom = intern(diff, LinRel::Eq, to_string(b)); break;
            case CmpOp::Ne:
              use.atom = intern(diff, LinRel::Eq, to_string(b));
              use.negated = true;
              break;
          }
        }
        uses[b.get()] = use;
        return;
      }
      case BoolExpr::Kind::Not: visit_bool(b->x); return;
      default:
        visit_bool(b->x);
        visit_bool(b->y);
    }
  }

  void visit_expr(const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::Const:
      case Expr::Kind::Var: return;
      case Expr::Kind::Pow: visit_expr(e->lhs); return;
      case Expr::Kind::Indicator: visit_bool(e->cond); return;
      default:
        visit_expr(e->lhs);
        visit_expr(e->rhs);
    }
  }

  bool eval_bool(const BoolPtr& b, const std::vector<bool>& truth) const {
    switch (b->kind) {
      case BoolExpr::Kind::Const: return b->bval;
      case BoolExpr::Kind::Cmp: {
        const CmpUse& u = uses.at(b.get());
        if (u.folded) return u.folded_value;
        bool t = truth[u.atom];
        return u.negated ? !t : t;
      }
      case BoolExpr::Kind::And: return eval_bool(b->x, truth) && eval_bool(b->y, truth);
      case BoolExpr::Kind::Or: return eval_bool(b->x, truth) || eval_bool(b->y, truth);
      case BoolExpr::Kind::Not: return !eval_bool(b->x, truth);
    }
    return false;
  }

  RatFunc build(const ExprPtr& e, const std::vector<bool>& truth, int nvars) const {
    switch (e->kind) {
      case Expr::Kind::Const: return RatFunc::constant(nvars, e->value);
      case Expr::Kind::Var:
        if (vars->types[e->var] == VarType::Bool) {
          throw NormalizeError("boolean variable not eliminated: " + e->var_name);
        }
        return RatFunc::variable(nvars, e->var);
      case Expr::Kind::Add: return build(e->lhs, truth, nvars) + build(e->rhs, truth, nvars);
      case Expr::Kind::Sub: return build(e->lhs, truth, nvars) - build(e->rhs, truth, nvars);
      case Expr::Kind::Mul: {
        RatFunc a = build(e->lhs, truth, nvars);
        if (a.num.is_zero()) return RatFunc::constant(nvars, Rat(0));  // mirror eval's short-circuit
        RatFunc b = build(e->rhs, truth, nvars);
        if (b.num.is_zero()) return RatFunc::constant(nvars, Rat(0));
        return a * b;
      }
      case Expr::Kind::Div: {
        RatFunc b = build(e->rhs, truth, nvars);
        if (b.num.is_zero()) throw NormalizeError("division by identically-zero expression in a region");
        return build(e->lhs, truth, nvars) / b;
      }
      case Expr::Kind::Pow: {
        RatFunc a = build(e->lhs, truth, nvars);
        if (e->exponent < 0 && a.num.is_zero()) {
          throw NormalizeError("negative power of identically-zero expression in a region");
        }
        return a.pow(e->exponent);
      }
      case Expr::Kind::Indicator:
        return RatFunc::constant(nvars, Rat(eval_bool(e->cond, truth) ? 1 : 0));
    }
    return RatFunc::constant(nvars, Rat(0));
  }
};

LinConstraint negate_constraint(const Atom& a, bool which_side_for_eq) {
  // Negation of (form <= 0) is (-form < 0); of (form < 0) is (-form <= 0);
  // a false equality splits into two strict branches.
  switch (a.rel) {
    case LinRel::Le: return {a.form.scaled(Rat(-1)), LinRel::Lt};
    case LinRel::Lt: return {a.form.scaled(Rat(-1)), LinRel::Le};
    case LinRel::Eq:
      return which_side_for_eq ? LinConstraint{a.form, LinRel::Lt}
                               : LinConstraint{a.form.scaled(Rat(-1)), LinRel::Lt};
  }
  return {a.form, LinRel::Le};
}

}  // namespace

int GuardedRationalForm::region_count() const {
  int n = 0;
  for (auto& b : blocks) n += static_cast<int>(b.regions.size());
  return n;
}

GuardedRationalForm normalize(const ExprPtr& E, const VarTablePtr& vars, int atom_cap) {
  GuardedRationalForm out;
  out.vars = vars;

  std::vector<bool> seen(vars->size(), false);
  collect_vars(E, seen);
  for (int v = 0; v < vars->size(); ++v) {
    if (seen[v] && vars->types[v] == VarType::Bool) out.bool_vars.push_back(v);
  }
  if (static_cast<int>(out.bool_vars.size()) > atom_cap) {
    throw NormalizeError("atom cap exceeded by boolean variables");
  }
  int nbool = static_cast<int>(out.bool_vars.size());
  int nvars = vars->size();

  for (int mask = 0; mask < (1 << nbool); ++mask) {
    BoolBlock block;
    ExprPtr e = E;
    for (int i = 0; i < nbool; ++i) {
      bool val = (mask >> i) & 1;
      block.bool_assign.push_back(val);
      e = substitute(e, out.bool_vars[i], mk_const_int(val ? 1 : 0));
    }

    AtomCollector col(vars, atom_cap - nbool);
    col.visit_expr(e);
    block.atoms = col.atoms;
    int natoms = static_cast<int>(block.atoms.size());

    for (int tmask = 0; tmask < (1 << natoms); ++tmask) {
      std::vector<bool> truth(natoms);
      for (int i = 0; i < natoms; ++i) truth[i] = (tmask >> i) & 1;

      // Enumerate branch systems: false equalities contribute two sides.
      std::vector<int> false_eqs;
      for (int i = 0; i < natoms; ++i) {
        if (!truth[i] && block.atoms[i].rel == LinRel::Eq) false_eqs.push_back(i);
      }
      std::vector<LinearSystem> feasible_branches;
      int nbranch = 1 << false_eqs.size();
      for (int bmask = 0; bmask < nbranch; ++bmask) {
        LinearSystem sys(vars);
        sys.add_prob_type_bounds();
        size_t eq_pos = 0;
        for (int i = 0; i < natoms; ++i) {
          const Atom& a = block.atoms[i];
          if (truth[i]) {
            sys.add(a.form, a.rel);
          } else if (a.rel == LinRel::Eq) {
            bool side = (bmask >> eq_pos) & 1;
            ++eq_pos;
            sys.add(negate_constraint(a, side));
          } else {
            sys.add(negate_constraint(a, false));
          }
        }
        if (sys.feasible()) feasible_branches.push_back(std::move(sys));
      }
      if (feasible_branches.empty()) continue;

      Region region;
      region.atom_truth = truth;
      region.fn = col.build(e, truth, nvars);
      region.branches = std::move(feasible_branches);
      block.regions.push_back(std::move(region));
    }
    out.blocks.push_back(std::move(block));
  }
  return out;
}

Rat eval_form(const GuardedRationalForm& f, const StateR& s) {
  for (auto& block : f.blocks) {
    bool match = true;
    for (size_t i = 0; i < f.bool_vars.size() && match; ++i) {
      bool v = s[f.bool_vars[i]] != 0;
      match = v == block.bool_assign[i];
    }
    if (!match) continue;
    std::vector<bool> truth(block.atoms.size());
    for (size_t i = 0; i < block.atoms.size(); ++i) {
      Rat v = block.atoms[i].form.eval(s);
      switch (block.atoms[i].rel) {
        case LinRel::Le: truth[i] = v <= 0; break;
        case LinRel::Lt: truth[i] = v < 0; break;
        case LinRel::Eq: truth[i] = v == 0; break;
      }
    }
    for (auto& region : block.regions) {
      if (region.atom_truth == truth) return region.fn.eval(s);
    }
    throw EvalError("state falls in a pruned (infeasible) region");
  }
  throw EvalError("state matches no boolean block");
}

bool form_is_identically_zero(const GuardedRationalForm& f) {
  for (auto& block : f.blocks) {
    for (auto& region : block.regions) {
      if (region.fn.num.is_zero()) continue;
      for (auto& branch : region.branches) {
        Poly reduced = reduce_poly_by_implied_equalities(region.fn.num, branch);
        if (!reduced.is_zero()) return false;
      }
    }
  }
  return true;
}

std::vector<Poly> collect_denominators(const GuardedRationalForm& f) {
  std::vector<Poly> out;
  std::set<std::string> seen;
  for (auto& block : f.blocks) {
    for (auto& region : block.regions) {
      const Poly& d = region.fn.den;
      if (d.is_constant()) continue;
      std::string key = d.to_string(*f.vars);
      if (seen.insert(key).second) out.push_back(d);
    }
  }
  return out;
}

}  // namespace exist
