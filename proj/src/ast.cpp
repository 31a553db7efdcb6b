#include "exist/ast.hpp"

#include <sstream>
#include <stdexcept>

namespace exist {

std::string var_type_name(VarType t) {
  switch (t) {
    case VarType::Bool: return "bool";
    case VarType::Int: return "int";
    case VarType::Prob: return "prob";
    case VarType::Real: return "real";
  }
  return "?";
}

int VarTable::add(const std::string& name, VarType type) {
  if (index.count(name)) throw std::invalid_argument("duplicate variable: " + name);
  int idx = static_cast<int>(names.size());
  names.push_back(name);
  types.push_back(type);
  index[name] = idx;
  return idx;
}

int VarTable::lookup(const std::string& name) const {
  auto it = index.find(name);
  return it == index.end() ? -1 : it->second;
}

StateR state_to_rational(const StateD& s) {
  StateR r(s.size());
  for (size_t i = 0; i < s.size(); ++i) r[i] = rat_from_double(s[i]);
  return r;
}

StateD state_to_double(const StateR& s) {
  StateD d(s.size());
  for (size_t i = 0; i < s.size(); ++i) d[i] = rat_to_double(s[i]);
  return d;
}

namespace {
const Rat& const_of(const ExprPtr& e) { return e->value; }
bool is_const(const ExprPtr& e) { return e->kind == Expr::Kind::Const; }
bool is_const(const ExprPtr& e, int v) {
  return e->kind == Expr::Kind::Const && e->value == v;
}
}  // namespace

ExprPtr mk_const(const Rat& v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Const;
  e->value = v;
  return e;
}

ExprPtr mk_const_int(long long v) { return mk_const(Rat(v)); }

ExprPtr mk_var(int idx, const std::string& name) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->var = idx;
  e->var_name = name;
  return e;
}

ExprPtr mk_var(const VarTablePtr& vars, const std::string& name) {
  int idx = vars->lookup(name);
  if (idx < 0) throw std::invalid_argument("unknown variable: " + name);
  return mk_var(idx, name);
}

ExprPtr mk_add(ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b)) return mk_const(const_of(a) + const_of(b));
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Add;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

ExprPtr mk_sub(ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b)) return mk_const(const_of(a) - const_of(b));
  if (is_const(b, 0)) return a;
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Sub;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

ExprPtr mk_mul(ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b)) return mk_const(const_of(a) * const_of(b));
  if (is_const(a, 0) || is_const(b, 0)) return mk_const(Rat(0));
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Mul;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

ExprPtr mk_div(ExprPtr a, ExprPtr b) {
  if (is_const(b) && const_of(b) != 0) {
    if (is_const(a)) return mk_const(const_of(a) / const_of(b));
    if (const_of(b) == 1) return a;
  }
  if (is_const(a, 0) && !(is_const(b) && const_of(b) == 0)) return mk_const(Rat(0));
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Div;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

ExprPtr mk_pow(ExprPtr a, int n) {
  if (n == 1) return a;
  if (n == 0) return mk_const(Rat(1));
  if (is_const(a) && !(const_of(a) == 0 && n < 0)) {
    Rat r = 1;
    Rat base = const_of(a);
    int k = n < 0 ? -n : n;
    for (int i = 0; i < k; ++i) r *= base;
    return mk_const(n < 0 ? Rat(1) / r : r);
  }
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Pow;
  e->lhs = std::move(a);
  e->exponent = n;
  return e;
}

ExprPtr mk_indicator(BoolPtr b) {
  if (b->kind == BoolExpr::Kind::Const) return mk_const(Rat(b->bval ? 1 : 0));
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Indicator;
  e->cond = std::move(b);
  return e;
}

BoolPtr mk_bconst(bool v) {
  auto b = std::make_shared<BoolExpr>();
  b->kind = BoolExpr::Kind::Const;
  b->bval = v;
  return b;
}

BoolPtr mk_cmp(CmpOp op, ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b)) {
    const Rat& x = const_of(a);
    const Rat& y = const_of(b);
    bool r = false;
    switch (op) {
      case CmpOp::Lt: r = x < y; break;
      case CmpOp::Le: r = x <= y; break;
      case CmpOp::Eq: r = x == y; break;
      case CmpOp::Ne: r = x != y; break;
      case CmpOp::Gt: r = x > y; break;
      case CmpOp::Ge: r = x >= y; break;
    }
    return mk_bconst(r);
  }
  auto c = std::make_shared<BoolExpr>();
  c->kind = BoolExpr::Kind::Cmp;
  c->op = op;
  c->a = std::move(a);
  c->b = std::move(b);
  return c;
}

BoolPtr mk_and(BoolPtr a, BoolPtr b) {
  if (a->kind == BoolExpr::Kind::Const) return a->bval ? b : a;
  if (b->kind == BoolExpr::Kind::Const) return b->bval ? a : b;
  auto c = std::make_shared<BoolExpr>();
  c->kind = BoolExpr::Kind::And;
  c->x = std::move(a);
  c->y = std::move(b);
  return c;
}

BoolPtr mk_or(BoolPtr a, BoolPtr b) {
  if (a->kind == BoolExpr::Kind::Const) return a->bval ? a : b;
  if (b->kind == BoolExpr::Kind::Const) return b->bval ? b : a;
  auto c = std::make_shared<BoolExpr>();
  c->kind = BoolExpr::Kind::Or;
  c->x = std::move(a);
  c->y = std::move(b);
  return c;
}

BoolPtr mk_not(BoolPtr a) {
  if (a->kind == BoolExpr::Kind::Const) return mk_bconst(!a->bval);
  if (a->kind == BoolExpr::Kind::Not) return a->x;
  if (a->kind == BoolExpr::Kind::Cmp) {
    CmpOp flip;
    switch (a->op) {
      case CmpOp::Lt: flip = CmpOp::Ge; break;
      case CmpOp::Le: flip = CmpOp::Gt; break;
      case CmpOp::Eq: flip = CmpOp::Ne; break;
      case CmpOp::Ne: flip = CmpOp::Eq; break;
      case CmpOp::Gt: flip = CmpOp::Le; break;
      case CmpOp::Ge: flip = CmpOp::Lt; break;
      default: flip = CmpOp::Eq; break;
    }
    return mk_cmp(flip, a->a, a->b);
  }
  auto c = std::make_shared<BoolExpr>();
  c->kind = BoolExpr::Kind::Not;
  c->x = std::move(a);
  return c;
}

CmdPtr mk_skip() {
  auto c = std::make_shared<Cmd>();
  c->kind = Cmd::Kind::Skip;
  return c;
}

CmdPtr mk_assign(int var, const std::string& name, ExprPtr e) {
  auto c = std::make_shared<Cmd>();
  c->kind = Cmd::Kind::Assign;
  c->var = var;
  c->var_name = name;
  c->expr = std::move(e);
  return c;
}

CmdPtr mk_sample(int var, const std::string& name, DistPtr d) {
  auto c = std::make_shared<Cmd>();
  c->kind = Cmd::Kind::Sample;
  c->var = var;
  c->var_name = name;
  c->dist = std::move(d);
  return c;
}

CmdPtr mk_seq(CmdPtr a, CmdPtr b) {
  if (a->kind == Cmd::Kind::Skip) return b;
  if (b->kind == Cmd::Kind::Skip) return a;
  auto c = std::make_shared<Cmd>();
  c->kind = Cmd::Kind::Seq;
  c->a = std::move(a);
  c->b = std::move(b);
  return c;
}

CmdPtr mk_if(BoolPtr cond, CmdPtr t, CmdPtr e) {
  auto c = std::make_shared<Cmd>();
  c->kind = Cmd::Kind::If;
  c->cond = std::move(cond);
  c->a = std::move(t);
  c->b = std::move(e);
  return c;
}

ExprPtr substitute(const ExprPtr& e, int var, const ExprPtr& replacement) {
  switch (e->kind) {
    case Expr::Kind::Const: return e;
    case Expr::Kind::Var: return e->var == var ? replacement : e;
    case Expr::Kind::Add: return mk_add(substitute(e->lhs, var, replacement), substitute(e->rhs, var, replacement));
    case Expr::Kind::Sub: return mk_sub(substitute(e->lhs, var, replacement), substitute(e->rhs, var, replacement));
    case Expr::Kind::Mul: return mk_mul(substitute(e->lhs, var, replacement), substitute(e->rhs, var, replacement));
    case Expr::Kind::Div: return mk_div(substitute(e->lhs, var, replacement), substitute(e->rhs, var, replacement));
    case Expr::Kind::Pow: return mk_pow(substitute(e->lhs, var, replacement), e->exponent);
    case Expr::Kind::Indicator: return mk_indicator(substitute_bool(e->cond, var, replacement));
  }
  return e;
}

BoolPtr substitute_bool(const BoolPtr& b, int var, const ExprPtr& replacement) {
  switch (b->kind) {
    case BoolExpr::Kind::Const: return b;
    case BoolExpr::Kind::Cmp:
      return mk_cmp(b->op, substitute(b->a, var, replacement), substitute(b->b, var, replacement));
    case BoolExpr::Kind::And:
      return mk_and(substitute_bool(b->x, var, replacement), substitute_bool(b->y, var, replacement));
    case BoolExpr::Kind::Or:
      return mk_or(substitute_bool(b->x, var, replacement), substitute_bool(b->y, var, replacement));
    case BoolExpr::Kind::Not: return mk_not(substitute_bool(b->x, var, replacement));
  }
  return b;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Const: return a->value == b->value;
    case Expr::Kind::Var: return a->var == b->var;
    case Expr::Kind::Pow: return a->exponent == b->exponent && expr_equal(a->lhs, b->lhs);
    case Expr::Kind::Indicator: return bool_equal(a->cond, b->cond);
    default: return expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
  }
}

bool bool_equal(const BoolPtr& a, const BoolPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case BoolExpr::Kind::Const: return a->bval == b->bval;
    case BoolExpr::Kind::Cmp:
      return a->op == b->op && expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
    case BoolExpr::Kind::Not: return bool_equal(a->x, b->x);
    default: return bool_equal(a->x, b->x) && bool_equal(a->y, b->y);
  }
}

void collect_vars(const ExprPtr& e, std::vector<bool>& seen) {
  switch (e->kind) {
    case Expr::Kind::Const: return;
    case Expr::Kind::Var:
      if (e->var >= 0 && e->var < static_cast<int>(seen.size())) seen[e->var] = true;
      return;
    case Expr::Kind::Pow: collect_vars(e->lhs, seen); return;
    case Expr::Kind::Indicator: collect_vars_bool(e->cond, seen); return;
    default:
      collect_vars(e->lhs, seen);
      collect_vars(e->rhs, seen);
  }
}

void collect_vars_bool(const BoolPtr& b, std::vector<bool>& seen) {
  switch (b->kind) {
    case BoolExpr::Kind::Const: return;
    case BoolExpr::Kind::Cmp:
      collect_vars(b->a, seen);
      collect_vars(b->b, seen);
      return;
    case BoolExpr::Kind::Not: collect_vars_bool(b->x, seen); return;
    default:
      collect_vars_bool(b->x, seen);
      collect_vars_bool(b->y, seen);
  }
}

void collect_vars_cmd(const CmdPtr& c, std::vector<bool>& seen) {
  switch (c->kind) {
    case Cmd::Kind::Skip: return;
    case Cmd::Kind::Assign:
      if (c->var >= 0) seen[c->var] = true;
      collect_vars(c->expr, seen);
      return;
    case Cmd::Kind::Sample:
      if (c->var >= 0) seen[c->var] = true;
      if (c->dist->kind == DistExpr::Kind::Bernoulli) {
        collect_vars(c->dist->param, seen);
      } else {
        for (auto& [v, w] : c->dist->outcomes) collect_vars(w, seen);
      }
      return;
    case Cmd::Kind::Seq:
      collect_vars_cmd(c->a, seen);
      collect_vars_cmd(c->b, seen);
      return;
    case Cmd::Kind::If:
      collect_vars_bool(c->cond, seen);
      collect_vars_cmd(c->a, seen);
      collect_vars_cmd(c->b, seen);
  }
}

void collect_written_vars(const CmdPtr& c, std::vector<bool>& written) {
  switch (c->kind) {
    case Cmd::Kind::Skip: return;
    case Cmd::Kind::Assign:
    case Cmd::Kind::Sample:
      if (c->var >= 0) written[c->var] = true;
      return;
    case Cmd::Kind::Seq:
    case Cmd::Kind::If:
      collect_written_vars(c->a, written);
      collect_written_vars(c->b, written);
      return;
  }
}

// ---- Pretty printing --------------------------------------------------------

namespace {

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Pow: return 3;
    default: return 4;
  }
}

void print_expr(std::ostream& os, const ExprPtr& e, int parent_prec);

void print_bool(std::ostream& os, const BoolPtr& b, bool parens_needed) {
  switch (b->kind) {
    case BoolExpr::Kind::Const:
      os << (b->bval ? "true" : "false");
      return;
    case BoolExpr::Kind::Cmp: {
      const char* ops[] = {"<", "<=", "==", "!=", ">", ">="};
      print_expr(os, b->a, 1);
      os << " " << ops[static_cast<int>(b->op)] << " ";
      print_expr(os, b->b, 1);
      return;
    }
    case BoolExpr::Kind::And:
      if (parens_needed) os << "(";
      print_bool(os, b->x, true);
      os << " && ";
      print_bool(os, b->y, true);
      if (parens_needed) os << ")";
      return;
    case BoolExpr::Kind::Or:
      if (parens_needed) os << "(";
      print_bool(os, b->x, true);
      os << " || ";
      print_bool(os, b->y, true);
      if (parens_needed) os << ")";
      return;
    case BoolExpr::Kind::Not:
      os << "!(";
      print_bool(os, b->x, false);
      os << ")";
      return;
  }
}

void print_expr(std::ostream& os, const ExprPtr& e, int parent_prec) {
  int prec = precedence(e->kind);
  bool parens = prec < parent_prec;
  switch (e->kind) {
    case Expr::Kind::Const: {
      bool neg = e->value < 0;
      if (neg && parent_prec > 0) os << "(";
      os << rat_to_pretty_string(e->value);
      if (neg && parent_prec > 0) os << ")";
      return;
    }
    case Expr::Kind::Var: os << e->var_name; return;
    case Expr::Kind::Add:
      if (parens) os << "(";
      print_expr(os, e->lhs, prec);
      os << " + ";
      print_expr(os, e->rhs, prec);
      if (parens) os << ")";
      return;
    case Expr::Kind::Sub:
      if (parens) os << "(";
      print_expr(os, e->lhs, prec);
      os << " - ";
      print_expr(os, e->rhs, prec + 1);
      if (parens) os << ")";
      return;
    case Expr::Kind::Mul:
      if (parens) os << "(";
      print_expr(os, e->lhs, prec);
      os << " * ";
      print_expr(os, e->rhs, prec + 1);  // keep a * (b / c) distinct from a * b / c
      if (parens) os << ")";
      return;
    case Expr::Kind::Div:
      if (parens) os << "(";
      print_expr(os, e->lhs, prec);
      os << " / ";
      print_expr(os, e->rhs, prec + 1);
      if (parens) os << ")";
      return;
    case Expr::Kind::Pow:
      print_expr(os, e->lhs, 4);
      os << "^" << e->exponent;
      return;
    case Expr::Kind::Indicator:
      os << "[";
      print_bool(os, e->cond, false);
      os << "]";
      return;
  }
}

}  // namespace

std::string to_string(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e, 0);
  return os.str();
}

std::string to_string(const BoolPtr& b) {
  std::ostringstream os;
  print_bool(os, b, false);
  return os.str();
}

std::string to_string(const CmdPtr& c, int indent) {
  std::string pad(indent, ' ');
  switch (c->kind) {
    case Cmd::Kind::Skip: return pad + "skip;\n";
    case Cmd::Kind::Assign: return pad + c->var_name + " := " + to_string(c->expr) + ";\n";
    case Cmd::Kind::Sample: {
      std::string d;
      if (c->dist->kind == DistExpr::Kind::Bernoulli) {
        d = "bernoulli(" + to_string(c->dist->param) + ")";
      } else {
        d = "discrete(";
        bool first = true;
        for (auto& [v, w] : c->dist->outcomes) {
          if (!first) d += ", ";
          first = false;
          d += rat_to_pretty_string(v) + " @ " + to_string(w);
        }
        d += ")";
      }
      return pad + c->var_name + " ~ " + d + ";\n";
    }
    case Cmd::Kind::Seq: return to_string(c->a, indent) + to_string(c->b, indent);
    case Cmd::Kind::If: {
      std::string s = pad + "if (" + to_string(c->cond) + ") {\n" + to_string(c->a, indent + 2) + pad + "}";
      if (c->b->kind != Cmd::Kind::Skip) {
        s += " else {\n" + to_string(c->b, indent + 2) + pad + "}";
      }
      return s + "\n";
    }
  }
  return "";
}

std::string to_string(const Program& p) {
  std::string s;
  for (int i = 0; i < p.vars->size(); ++i) {
    s += "var " + p.vars->names[i] + " : " + var_type_name(p.vars->types[i]) + ";\n";
  }
  for (auto& f : p.user_features) s += "feature " + to_string(f) + ";\n";
  s += "while (" + to_string(p.guard) + ") {\n" + to_string(p.body, 2) + "}\n";
  return s;
}

}  // namespace exist
