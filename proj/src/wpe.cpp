#include "exist/wpe.hpp"

namespace exist {

ExprPtr wpe_loopfree(const CmdPtr& c, const ExprPtr& E) {
  switch (c->kind) {
    case Cmd::Kind::Skip: return E;
    case Cmd::Kind::Assign: return substitute(E, c->var, c->expr);
    case Cmd::Kind::Sample: {
      const DistExpr& d = *c->dist;
      if (d.kind == DistExpr::Kind::Bernoulli) {
        ExprPtr hit = substitute(E, c->var, mk_const_int(1));
        ExprPtr miss = substitute(E, c->var, mk_const_int(0));
        ExprPtr q = mk_sub(mk_const_int(1), d.param);
        return mk_add(mk_mul(d.param, hit), mk_mul(q, miss));
      }
      ExprPtr sum = mk_const_int(0);
      for (auto& [v, w] : d.outcomes) {
        sum = mk_add(sum, mk_mul(w, substitute(E, c->var, mk_const(v))));
      }
      return sum;
    }
    case Cmd::Kind::Seq: return wpe_loopfree(c->a, wpe_loopfree(c->b, E));
    case Cmd::Kind::If: {
      ExprPtr then_pre = wpe_loopfree(c->a, E);
      ExprPtr else_pre = wpe_loopfree(c->b, E);
      return mk_add(mk_mul(mk_indicator(c->cond), then_pre),
                    mk_mul(mk_indicator(mk_not(c->cond)), else_pre));
    }
  }
  return E;
}

ExprPtr char_fn_apply(const Program& prog, const ExprPtr& postE, const ExprPtr& I) {
  return mk_add(mk_mul(mk_indicator(prog.guard), wpe_loopfree(prog.body, I)),
                mk_mul(mk_indicator(mk_not(prog.guard)), postE));
}

}  // namespace exist
