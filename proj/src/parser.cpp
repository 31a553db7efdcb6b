#include "exist/parser.hpp"

#include <cctype>
#include <optional>
#include <variant>

namespace exist {

namespace {

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = {Token::Kind::End, "", line_, col_};
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        s += take();
      }
      tok_ = {Token::Kind::Ident, s, tok_.line, tok_.col};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      std::string s;
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        s += take();
      }
      tok_ = {Token::Kind::Number, s, tok_.line, tok_.col};
      return;
    }
    // Multi-character operators first.
    static const char* two[] = {":=", "==", "!=", "<=", ">=", "&&", "||"};
    for (auto* op : two) {
      if (src_.compare(pos_, 2, op) == 0) {
        take();
        take();
        tok_ = {Token::Kind::Punct, op, tok_.line, tok_.col};
        return;
      }
    }
    std::string s(1, take());
    tok_ = {Token::Kind::Punct, s, tok_.line, tok_.col};
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n') take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        break;
      }
    }
  }

  char take() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// A parsed subexpression is either arithmetic or boolean; coercions are
// explicit so that bool vars can appear in arithmetic (as 0/1) and
// comparisons/indicators can appear wherever a number is expected.
struct Val {
  ExprPtr e;
  BoolPtr b;
};

class Parser {
 public:
  Parser(const std::string& src, VarTablePtr vars) : lex_(src), vars_(std::move(vars)) {}

  [[noreturn]] void fail(const std::string& msg, const Token& t) { throw ParseError(msg, t.line, t.col); }

  bool peek_punct(const std::string& p) {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
  }
  bool peek_ident(const std::string& s) {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == s;
  }
  bool accept_punct(const std::string& p) {
    if (peek_punct(p)) {
      lex_.next();
      return true;
    }
    return false;
  }
  bool accept_ident(const std::string& s) {
    if (peek_ident(s)) {
      lex_.next();
      return true;
    }
    return false;
  }
  void expect_punct(const std::string& p) {
    if (!accept_punct(p)) fail("expected '" + p + "'", lex_.peek());
  }

  ExprPtr to_expr(const Val& v, const Token& at) {
    if (v.e) return v.e;
    return mk_indicator(v.b);
  }

  BoolPtr to_bool(const Val& v, const Token& at) {
    if (v.b) return v.b;
    const ExprPtr& e = v.e;
    if (e->kind == Expr::Kind::Indicator) return e->cond;
    if (e->kind == Expr::Kind::Var && vars_ && vars_->types[e->var] == VarType::Bool) {
      return mk_cmp(CmpOp::Eq, e, mk_const_int(1));
    }
    if (e->kind == Expr::Kind::Const) return mk_bconst(e->value != 0);
    fail("expected a boolean expression", at);
  }

  // Precedence climbing over a unified grammar:
  //   or > and > not > comparison > additive > multiplicative > unary > power > atom
  Val parse_or() {
    Token at = lex_.peek();
    Val v = parse_and();
    while (peek_punct("||") || peek_ident("or")) {
      lex_.next();
      Val r = parse_and();
      v = Val{nullptr, mk_or(to_bool(v, at), to_bool(r, at))};
    }
    return v;
  }

  Val parse_and() {
    Token at = lex_.peek();
    Val v = parse_not();
    while (peek_punct("&&") || peek_punct("&") || peek_ident("and")) {
      lex_.next();
      Val r = parse_not();
      v = Val{nullptr, mk_and(to_bool(v, at), to_bool(r, at))};
    }
    return v;
  }

  Val parse_not() {
    Token at = lex_.peek();
    if (accept_punct("!") || accept_ident("not")) {
      Val v = parse_not();
      return Val{nullptr, mk_not(to_bool(v, at))};
    }
    return parse_cmp();
  }

  Val parse_cmp() {
    Token at = lex_.peek();
    Val v = parse_additive();
    static const std::pair<const char*, CmpOp> ops[] = {
        {"<=", CmpOp::Le}, {">=", CmpOp::Ge}, {"==", CmpOp::Eq},
        {"!=", CmpOp::Ne}, {"<", CmpOp::Lt},  {">", CmpOp::Gt}};
    for (auto& [p, op] : ops) {
      if (peek_punct(p)) {
        lex_.next();
        Val r = parse_additive();
        return Val{nullptr, mk_cmp(op, to_expr(v, at), to_expr(r, at))};
      }
    }
    return v;
  }

  Val parse_additive() {
    Token at = lex_.peek();
    Val v = parse_multiplicative();
    while (peek_punct("+") || peek_punct("-")) {
      bool plus = lex_.next().text == "+";
      Val r = parse_multiplicative();
      ExprPtr e = plus ? mk_add(to_expr(v, at), to_expr(r, at)) : mk_sub(to_expr(v, at), to_expr(r, at));
      v = Val{e, nullptr};
    }
    return v;
  }

  Val parse_multiplicative() {
    Token at = lex_.peek();
    Val v = parse_unary();
    while (peek_punct("*") || peek_punct("/")) {
      bool mul = lex_.next().text == "*";
      Val r = parse_unary();
      ExprPtr e = mul ? mk_mul(to_expr(v, at), to_expr(r, at)) : mk_div(to_expr(v, at), to_expr(r, at));
      v = Val{e, nullptr};
    }
    return v;
  }

  Val parse_unary() {
    if (accept_punct("-")) {
      Token at = lex_.peek();
      Val v = parse_unary();
      return Val{mk_sub(mk_const_int(0), to_expr(v, at)), nullptr};
    }
    if (accept_punct("+")) return parse_unary();
    return parse_power();
  }

  Val parse_power() {
    Token at = lex_.peek();
    Val v = parse_atom();
    if (peek_punct("^")) {
      lex_.next();
      bool neg = accept_punct("-");
      Token t = lex_.next();
      if (t.kind != Token::Kind::Number || t.text.find('.') != std::string::npos) {
        fail("exponent must be an integer literal", t);
      }
      int n = std::stoi(t.text);
      return Val{mk_pow(to_expr(v, at), neg ? -n : n), nullptr};
    }
    return v;
  }

  Val parse_atom() {
    Token t = lex_.peek();
    if (t.kind == Token::Kind::Number) {
      lex_.next();
      return Val{mk_const(rat_from_decimal(t.text)), nullptr};
    }
    if (accept_punct("(")) {
      Val v = parse_or();
      expect_punct(")");
      return v;
    }
    if (accept_punct("[")) {
      Token at = lex_.peek();
      Val v = parse_or();
      expect_punct("]");
      return Val{mk_indicator(to_bool(v, at)), nullptr};
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "true") {
        lex_.next();
        return Val{nullptr, mk_bconst(true)};
      }
      if (t.text == "false") {
        lex_.next();
        return Val{nullptr, mk_bconst(false)};
      }
      lex_.next();
      int idx = vars_ ? vars_->lookup(t.text) : -1;
      if (idx < 0) fail("undeclared variable '" + t.text + "'", t);
      return Val{mk_var(idx, t.text), nullptr};
    }
    fail("unexpected token '" + t.text + "'", t);
  }

  Lexer lex_;
  VarTablePtr vars_;
};

ExprType join_arith(ExprType a, ExprType b) {
  auto norm = [](ExprType t) { return t == ExprType::Bool ? ExprType::Int : t; };
  a = norm(a);
  b = norm(b);
  if (a == ExprType::Int && b == ExprType::Int) return ExprType::Int;
  return ExprType::Real;
}

}  // namespace

ExprType infer_type(const ExprPtr& e, const VarTable& vars) {
  switch (e->kind) {
    case Expr::Kind::Const:
      return denominator(e->value) == 1 ? ExprType::Int : ExprType::Real;
    case Expr::Kind::Var:
      switch (vars.types[e->var]) {
        case VarType::Bool: return ExprType::Bool;
        case VarType::Int: return ExprType::Int;
        case VarType::Prob: return ExprType::Prob;
        case VarType::Real: return ExprType::Real;
      }
      return ExprType::Real;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      return join_arith(infer_type(e->lhs, vars), infer_type(e->rhs, vars));
    case Expr::Kind::Mul: {
      ExprType a = infer_type(e->lhs, vars);
      ExprType b = infer_type(e->rhs, vars);
      if (a == ExprType::Prob && b == ExprType::Prob) return ExprType::Prob;
      return join_arith(a, b);
    }
    case Expr::Kind::Div: return ExprType::Real;
    case Expr::Kind::Pow: {
      ExprType a = infer_type(e->lhs, vars);
      if (e->exponent >= 0 && (a == ExprType::Int || a == ExprType::Bool)) return ExprType::Int;
      if (e->exponent >= 0 && a == ExprType::Prob) return ExprType::Prob;
      return ExprType::Real;
    }
    case Expr::Kind::Indicator: return ExprType::Bool;
  }
  return ExprType::Real;
}

namespace {

bool const_in_unit(const ExprPtr& e) {
  return e->kind == Expr::Kind::Const && e->value >= 0 && e->value <= 1;
}

class ProgramParser : Parser {
 public:
  explicit ProgramParser(const std::string& src)
      : Parser(src, nullptr), table_(std::make_shared<VarTable>()) {}

  Program run(const std::string& name) {
    while (accept_ident("var")) parse_decl();
    vars_ = std::make_shared<const VarTable>(*table_);
    Program p;
    p.name = name;
    p.vars = vars_;
    while (accept_ident("feature")) {
      Token at = lex_.peek();
      p.user_features.push_back(check_numeric(to_expr(parse_or(), at), at));
      expect_punct(";");
    }
    Token at = lex_.peek();
    if (!accept_ident("while")) fail("expected 'while'", at);
    expect_punct("(");
    p.guard = to_bool(parse_or(), at);
    expect_punct(")");
    p.body = parse_block();
    Token end = lex_.peek();
    if (end.kind != Token::Kind::End) fail("trailing input after loop", end);
    return p;
  }

 private:
  void parse_decl() {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Ident) fail("expected variable name", t);
    expect_punct(":");
    Token ty = lex_.next();
    VarType vt;
    if (ty.text == "bool") vt = VarType::Bool;
    else if (ty.text == "int") vt = VarType::Int;
    else if (ty.text == "prob") vt = VarType::Prob;
    else if (ty.text == "real") vt = VarType::Real;
    else fail("unknown type '" + ty.text + "'", ty);
    if (table_->lookup(t.text) >= 0) fail("duplicate variable '" + t.text + "'", t);
    table_->add(t.text, vt);
    expect_punct(";");
  }

  ExprPtr check_numeric(ExprPtr e, const Token& at) {
    infer_type(e, *vars_);  // throws on structural issues only
    return e;
  }

  CmdPtr parse_block() {
    expect_punct("{");
    CmdPtr c = mk_skip();
    while (!accept_punct("}")) c = mk_seq(c, parse_stmt());
    return c;
  }

  CmdPtr parse_stmt() {
    Token t = lex_.peek();
    if (accept_ident("skip")) {
      expect_punct(";");
      return mk_skip();
    }
    if (accept_ident("if")) {
      expect_punct("(");
      Token at = lex_.peek();
      BoolPtr cond = to_bool(parse_or(), at);
      expect_punct(")");
      CmdPtr then_cmd = parse_block();
      CmdPtr else_cmd = accept_ident("else") ? parse_block() : mk_skip();
      return mk_if(cond, then_cmd, else_cmd);
    }
    if (t.kind != Token::Kind::Ident) fail("expected statement", t);
    lex_.next();
    int idx = vars_->lookup(t.text);
    if (idx < 0) fail("undeclared variable '" + t.text + "'", t);
    VarType vt = vars_->types[idx];
    if (accept_punct("~")) {
      DistPtr d = parse_dist(vt, t);
      expect_punct(";");
      return mk_sample(idx, t.text, d);
    }
    if (accept_punct(":=") || accept_punct("=")) {
      Token at = lex_.peek();
      Val v = parse_or();
      expect_punct(";");
      ExprPtr rhs = to_expr(v, at);
      check_assign(vt, rhs, t);
      return mk_assign(idx, t.text, rhs);
    }
    fail("expected ':=', '=' or '~' after variable", t);
  }

  void check_assign(VarType target, const ExprPtr& rhs, const Token& at) {
    ExprType rt = infer_type(rhs, *vars_);
    switch (target) {
      case VarType::Bool:
        if (rt != ExprType::Bool &&
            !(rhs->kind == Expr::Kind::Const && (rhs->value == 0 || rhs->value == 1)))
          fail("type error: assigning non-boolean to bool variable", at);
        break;
      case VarType::Int:
        if (rt != ExprType::Int && rt != ExprType::Bool)
          fail("type error: assigning non-integer to int variable", at);
        break;
      case VarType::Prob:
        if (rt != ExprType::Prob && !const_in_unit(rhs))
          fail("type error: assigning non-probability to prob variable", at);
        break;
      case VarType::Real:
        break;
    }
  }

  DistPtr parse_dist(VarType target, const Token& at) {
    if (accept_ident("bernoulli")) {
      if (target != VarType::Bool)
        fail("type error: " + var_type_name(target) + " sampled from bernoulli", at);
      expect_punct("(");
      Token pt = lex_.peek();
      ExprPtr param = to_expr(parse_or(), pt);
      expect_punct(")");
      ExprType ty = infer_type(param, *vars_);
      if (ty != ExprType::Prob && !const_in_unit(param))
        fail("type error: bernoulli parameter must have prob type", pt);
      auto d = std::make_shared<DistExpr>();
      d->kind = DistExpr::Kind::Bernoulli;
      d->param = param;
      return d;
    }
    if (accept_ident("discrete")) {
      if (target == VarType::Bool) fail("type error: bool sampled from discrete", at);
      expect_punct("(");
      auto d = std::make_shared<DistExpr>();
      d->kind = DistExpr::Kind::Discrete;
      do {
        bool neg = accept_punct("-");
        Token vt = lex_.next();
        if (vt.kind != Token::Kind::Number) fail("expected outcome value", vt);
        Rat v = rat_from_decimal(vt.text);
        if (neg) v = -v;
        if (target == VarType::Int && denominator(v) != 1)
          fail("type error: non-integer outcome for int variable", vt);
        expect_punct("@");
        Token wt = lex_.peek();
        ExprPtr w = to_expr(parse_or(), wt);
        d->outcomes.emplace_back(v, w);
      } while (accept_punct(","));
      expect_punct(")");
      return d;
    }
    fail("expected 'bernoulli' or 'discrete'", lex_.peek());
  }

  std::shared_ptr<VarTable> table_;
};

}  // namespace

Program parse_program(const std::string& text, const std::string& name) {
  ProgramParser p(text);
  return p.run(name);
}

ExprPtr parse_expectation(const std::string& text, const VarTablePtr& vars) {
  struct ExprParser : Parser {
    ExprParser(const std::string& s, VarTablePtr v) : Parser(s, std::move(v)) {}
    ExprPtr run() {
      Token at = lex_.peek();
      ExprPtr e = to_expr(parse_or(), at);
      Token end = lex_.peek();
      if (end.kind != Token::Kind::End) fail("trailing input after expression", end);
      return e;
    }
  };
  ExprParser p(text, vars);
  return p.run();
}

}  // namespace exist
