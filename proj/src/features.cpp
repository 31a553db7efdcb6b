#include "exist/features.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "exist/eval.hpp"

namespace exist {

std::vector<double> FeatureSet::eval(const StateD& s) const {
  std::vector<double> out(items.size());
  for (size_t i = 0; i < items.size(); ++i) out[i] = eval_expr(items[i].expr, s);
  return out;
}

std::string canonical_feature_key(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Const: return "c:" + rat_to_string(e->value);
    case Expr::Kind::Var: return "v:" + std::to_string(e->var);
    case Expr::Kind::Add:
    case Expr::Kind::Mul: {
      // Flatten commutative chains and sort the operand keys.
      bool add = e->kind == Expr::Kind::Add;
      std::vector<std::string> parts;
      std::vector<ExprPtr> stack{e->lhs, e->rhs};
      while (!stack.empty()) {
        ExprPtr cur = stack.back();
        stack.pop_back();
        if (cur->kind == e->kind) {
          stack.push_back(cur->lhs);
          stack.push_back(cur->rhs);
        } else {
          parts.push_back(canonical_feature_key(cur));
        }
      }
      std::sort(parts.begin(), parts.end());
      std::string out = add ? "(+ " : "(* ";
      for (auto& p : parts) out += p + " ";
      return out + ")";
    }
    case Expr::Kind::Sub:
      return "(- " + canonical_feature_key(e->lhs) + " " + canonical_feature_key(e->rhs) + ")";
    case Expr::Kind::Div:
      return "(/ " + canonical_feature_key(e->lhs) + " " + canonical_feature_key(e->rhs) + ")";
    case Expr::Kind::Pow:
      return "(^ " + canonical_feature_key(e->lhs) + " " + std::to_string(e->exponent) + ")";
    case Expr::Kind::Indicator: return "(ind " + to_string(e->cond) + ")";
  }
  return "?";
}

namespace {

struct Builder {
  std::set<std::string> seen;
  FeatureSet set;
  const VarTable& vars;
  int cap;

  Builder(LeafKind kind, const VarTable& v, int cap) : vars(v), cap(cap) { set.kind = kind; }

  void push(const ExprPtr& e) {
    if (!seen.insert(canonical_feature_key(e)).second) return;
    if (set.size() + 1 > cap) {
      throw std::runtime_error("feature cap exceeded (" + std::to_string(cap) + ")");
    }
    set.items.push_back({to_string(e), e, infer_type(e, vars)});
  }
};

}  // namespace

std::pair<FeatureSet, FeatureSet> get_features(const Program& prog, const ExprPtr& pexp, int cap) {
  const VarTable& vars = *prog.vars;

  // Base features with their class, in deterministic order.
  std::vector<std::pair<ExprPtr, ExprType>> base;
  for (int v = 0; v < vars.size(); ++v) {
    ExprPtr e = mk_var(v, vars.names[v]);
    base.emplace_back(e, infer_type(e, vars));
  }
  for (auto& uf : prog.user_features) base.emplace_back(uf, infer_type(uf, vars));

  std::vector<ExprPtr> probs, ints, bools, reals;
  for (auto& [e, t] : base) {
    switch (t) {
      case ExprType::Prob: probs.push_back(e); break;
      case ExprType::Int: ints.push_back(e); break;
      case ExprType::Bool: bools.push_back(e); break;
      case ExprType::Real: reals.push_back(e); break;
    }
  }

  ExprPtr guard_feature = mk_indicator(prog.guard);

  Builder fl(LeafKind::Linear, vars, cap);
  fl.push(guard_feature);
  fl.push(pexp);
  for (auto& [e, t] : base) fl.push(e);
  for (size_t i = 0; i < probs.size(); ++i) {
    for (size_t j = i; j < probs.size(); ++j) fl.push(mk_mul(probs[i], probs[j]));
  }
  for (size_t i = 0; i < ints.size(); ++i) {
    for (size_t j = i; j < ints.size(); ++j) fl.push(mk_mul(ints[i], ints[j]));
  }
  for (size_t i = 0; i < reals.size(); ++i) {
    for (size_t j = i; j < reals.size(); ++j) fl.push(mk_mul(reals[i], reals[j]));
  }
  for (auto& n : ints) {
    for (auto& x : reals) fl.push(mk_mul(n, x));
  }
  for (size_t i = 0; i < bools.size(); ++i) {
    for (size_t j = i; j < bools.size(); ++j) {
      // b*b is b for 0/1-valued features.
      fl.push(i == j ? bools[i] : mk_mul(bools[i], bools[j]));
    }
  }

  Builder fm(LeafKind::Multiplicative, vars, cap);
  fm.push(guard_feature);
  fm.push(pexp);
  for (auto& [e, t] : base) fm.push(e);
  ExprPtr one = mk_const_int(1);
  for (auto& p : probs) {
    fm.push(mk_add(one, p));
    fm.push(mk_sub(one, p));
  }
  for (size_t i = 0; i < probs.size(); ++i) {
    for (size_t j = i + 1; j < probs.size(); ++j) {
      fm.push(mk_add(probs[i], probs[j]));
      fm.push(mk_sub(mk_add(probs[i], probs[j]), mk_mul(probs[i], probs[j])));
    }
  }
  auto sums_and_diffs = [&fm](const std::vector<ExprPtr>& xs) {
    for (size_t i = 0; i < xs.size(); ++i) {
      for (size_t j = i + 1; j < xs.size(); ++j) {
        fm.push(mk_add(xs[i], xs[j]));
        fm.push(mk_sub(xs[i], xs[j]));
        fm.push(mk_sub(xs[j], xs[i]));
      }
    }
  };
  sums_and_diffs(ints);
  sums_and_diffs(reals);
  for (auto& n : ints) {
    for (auto& x : reals) {
      fm.push(mk_add(n, x));
      fm.push(mk_sub(n, x));
      fm.push(mk_sub(x, n));
    }
  }
  sums_and_diffs(bools);

  return {std::move(fl.set), std::move(fm.set)};
}

}  // namespace exist
