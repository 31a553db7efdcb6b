#include "exist/eval.hpp"

#include <cmath>
#include <sstream>

namespace exist {

namespace {

template <class V, class S>
V eval_expr_impl(const ExprPtr& e, const S& s);

template <class V, class S>
bool eval_bool_impl(const BoolPtr& b, const S& s) {
  switch (b->kind) {
    case BoolExpr::Kind::Const: return b->bval;
    case BoolExpr::Kind::Cmp: {
      V x = eval_expr_impl<V>(b->a, s);
      V y = eval_expr_impl<V>(b->b, s);
      switch (b->op) {
        case CmpOp::Lt: return x < y;
        case CmpOp::Le: return x <= y;
        case CmpOp::Eq: return x == y;
        case CmpOp::Ne: return x != y;
        case CmpOp::Gt: return x > y;
        case CmpOp::Ge: return x >= y;
      }
      return false;
    }
    case BoolExpr::Kind::And: return eval_bool_impl<V>(b->x, s) && eval_bool_impl<V>(b->y, s);
    case BoolExpr::Kind::Or: return eval_bool_impl<V>(b->x, s) || eval_bool_impl<V>(b->y, s);
    case BoolExpr::Kind::Not: return !eval_bool_impl<V>(b->x, s);
  }
  return false;
}

template <class V, class S>
V eval_expr_impl(const ExprPtr& e, const S& s) {
  switch (e->kind) {
    case Expr::Kind::Const:
      if constexpr (std::is_same_v<V, double>) {
        return rat_to_double(e->value);
      } else {
        return e->value;
      }
    case Expr::Kind::Var: return s[e->var];
    case Expr::Kind::Add: return eval_expr_impl<V>(e->lhs, s) + eval_expr_impl<V>(e->rhs, s);
    case Expr::Kind::Sub: return eval_expr_impl<V>(e->lhs, s) - eval_expr_impl<V>(e->rhs, s);
    case Expr::Kind::Mul: {
      V a = eval_expr_impl<V>(e->lhs, s);
      if (a == 0) return V(0);
      V b = eval_expr_impl<V>(e->rhs, s);
      if (b == 0) return V(0);
      return a * b;
    }
    case Expr::Kind::Div: {
      V b = eval_expr_impl<V>(e->rhs, s);
      if (b == 0) throw EvalError("division by zero");
      return eval_expr_impl<V>(e->lhs, s) / b;
    }
    case Expr::Kind::Pow: {
      V base = eval_expr_impl<V>(e->lhs, s);
      int n = e->exponent;
      if (n < 0 && base == 0) throw EvalError("division by zero (negative power)");
      V r(1);
      int k = n < 0 ? -n : n;
      for (int i = 0; i < k; ++i) r *= base;
      if (n < 0) r = V(1) / r;
      return r;
    }
    case Expr::Kind::Indicator: return V(eval_bool_impl<V>(e->cond, s) ? 1 : 0);
  }
  return V(0);
}

}  // namespace

double eval_expr(const ExprPtr& e, const StateD& s) { return eval_expr_impl<double>(e, s); }
bool eval_bool(const BoolPtr& b, const StateD& s) { return eval_bool_impl<double>(b, s); }
Rat eval_expr(const ExprPtr& e, const StateR& s) { return eval_expr_impl<Rat>(e, s); }
bool eval_bool(const BoolPtr& b, const StateR& s) { return eval_bool_impl<Rat>(b, s); }

namespace {

void exec_cmd(const CmdPtr& c, StateD& s, RandomStream& rng) {
  switch (c->kind) {
    case Cmd::Kind::Skip: return;
    case Cmd::Kind::Assign:
      s[c->var] = eval_expr(c->expr, s);
      return;
    case Cmd::Kind::Sample: {
      const DistExpr& d = *c->dist;
      if (d.kind == DistExpr::Kind::Bernoulli) {
        double p = eval_expr(d.param, s);
        if (p < -1e-12 || p > 1 + 1e-12) throw EvalError("bernoulli parameter outside [0,1]");
        s[c->var] = rng.bernoulli(p) ? 1.0 : 0.0;
      } else {
        double total = 0;
        double u = rng.next_unit();
        double chosen = rat_to_double(d.outcomes.back().first);
        bool hit = false;
        for (auto& [v, w] : d.outcomes) {
          double wd = eval_expr(w, s);
          if (wd < -1e-12) throw EvalError("negative weight in discrete distribution");
          total += wd;
          if (!hit && u < total) {
            chosen = rat_to_double(v);
            hit = true;
          }
        }
        if (std::abs(total - 1.0) > 1e-9) throw EvalError("discrete weights do not sum to 1");
        s[c->var] = chosen;
      }
      return;
    }
    case Cmd::Kind::Seq:
      exec_cmd(c->a, s, rng);
      exec_cmd(c->b, s, rng);
      return;
    case Cmd::Kind::If:
      exec_cmd(eval_bool(c->cond, s) ? c->a : c->b, s, rng);
      return;
  }
}

}  // namespace

StateD step_body(const Program& prog, const StateD& s, RandomStream& rng) {
  StateD out = s;
  exec_cmd(prog.body, out, rng);
  return out;
}

StateD run_to_termination(const Program& prog, const StateD& s, RandomStream& rng, long max_iters) {
  StateD cur = s;
  for (long i = 0; i < max_iters; ++i) {
    if (!eval_bool(prog.guard, cur)) return cur;
    exec_cmd(prog.body, cur, rng);
  }
  if (!eval_bool(prog.guard, cur)) return cur;
  throw MaxIterationsExceeded(describe_state(s, *prog.vars));
}

std::string describe_state(const StateD& s, const VarTable& vars) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << vars.names[i] << "=" << s[i];
  }
  os << "}";
  return os.str();
}

}  // namespace exist
