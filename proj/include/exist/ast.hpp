#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "exist/rational.hpp"

namespace exist {

enum class VarType { Bool, Int, Prob, Real };

std::string var_type_name(VarType t);

// Declared variables of a program, in declaration order. States are plain
// vectors indexed against this table.
struct VarTable {
  std::vector<std::string> names;
  std::vector<VarType> types;
  std::unordered_map<std::string, int> index;

  int add(const std::string& name, VarType type);
  int lookup(const std::string& name) const;  // -1 when absent
  int size() const { return static_cast<int>(names.size()); }
};
using VarTablePtr = std::shared_ptr<const VarTable>;

struct Expr;
struct BoolExpr;
using ExprPtr = std::shared_ptr<const Expr>;
using BoolPtr = std::shared_ptr<const BoolExpr>;

// Arithmetic expression tree. Also serves as the expectation type: an
// expectation is an Expr whose Indicator nodes give it piecewise structure
// ([b] * e in the usual bracket notation).
struct Expr {
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Indicator };
  Kind kind;
  Rat value;        // Const
  int var = -1;     // Var index into the VarTable
  std::string var_name;
  ExprPtr lhs, rhs;  // binary nodes; Pow uses lhs only
  int exponent = 0;  // Pow: integer exponent, may be negative
  BoolPtr cond;      // Indicator
};

enum class CmpOp { Lt, Le, Eq, Ne, Gt, Ge };

struct BoolExpr {
  enum class Kind { Const, Cmp, And, Or, Not };
  Kind kind;
  bool bval = false;  // Const
  CmpOp op = CmpOp::Eq;
  ExprPtr a, b;  // Cmp operands
  BoolPtr x, y;  // And/Or children; Not uses x
};

// Distribution expressions: Bernoulli(e) or a finite discrete distribution
// {v_i with weight e_i} where weights are expressions over the current state.
struct DistExpr {
  enum class Kind { Bernoulli, Discrete };
  Kind kind;
  ExprPtr param;  // Bernoulli
  std::vector<std::pair<Rat, ExprPtr>> outcomes;  // Discrete: (value, weight)
};
using DistPtr = std::shared_ptr<const DistExpr>;

// Loop-free commands; the single loop lives in Program.
struct Cmd {
  enum class Kind { Skip, Assign, Sample, Seq, If };
  Kind kind;
  int var = -1;  // Assign / Sample target
  std::string var_name;
  ExprPtr expr;  // Assign rhs
  DistPtr dist;  // Sample rhs
  std::shared_ptr<const Cmd> a, b;  // Seq children; If branches (a=then, b=else)
  BoolPtr cond;                     // If condition
};
using CmdPtr = std::shared_ptr<const Cmd>;

struct Program {
  std::string name;
  VarTablePtr vars;
  BoolPtr guard;
  CmdPtr body;
  std::vector<ExprPtr> user_features;
};

// States over a VarTable. Double states drive sampling and learning; rational
// states drive symbolic checks. Booleans are 0/1, ints are integral values.
using StateD = std::vector<double>;
using StateR = std::vector<Rat>;

StateR state_to_rational(const StateD& s);
StateD state_to_double(const StateR& s);

// ---- Constructors with light constant folding -----------------------------
// Folding keeps wpe rewrites from ballooning: 0+e, 1*e, 0*e, const op const,
// [true], [false] all collapse.

ExprPtr mk_const(const Rat& v);
ExprPtr mk_const_int(long long v);
ExprPtr mk_var(int idx, const std::string& name);
ExprPtr mk_var(const VarTablePtr& vars, const std::string& name);
ExprPtr mk_add(ExprPtr a, ExprPtr b);
ExprPtr mk_sub(ExprPtr a, ExprPtr b);
ExprPtr mk_mul(ExprPtr a, ExprPtr b);
ExprPtr mk_div(ExprPtr a, ExprPtr b);
ExprPtr mk_pow(ExprPtr a, int n);
ExprPtr mk_indicator(BoolPtr b);

BoolPtr mk_bconst(bool v);
BoolPtr mk_cmp(CmpOp op, ExprPtr a, ExprPtr b);
BoolPtr mk_and(BoolPtr a, BoolPtr b);
BoolPtr mk_or(BoolPtr a, BoolPtr b);
BoolPtr mk_not(BoolPtr a);

CmdPtr mk_skip();
CmdPtr mk_assign(int var, const std::string& name, ExprPtr e);
CmdPtr mk_sample(int var, const std::string& name, DistPtr d);
CmdPtr mk_seq(CmdPtr a, CmdPtr b);
CmdPtr mk_if(BoolPtr c, CmdPtr t, CmdPtr e);

// ---- Structural helpers ----------------------------------------------------

// Substitutes `replacement` for variable `var` everywhere, including inside
// indicator conditions.
ExprPtr substitute(const ExprPtr& e, int var, const ExprPtr& replacement);
BoolPtr substitute_bool(const BoolPtr& b, int var, const ExprPtr& replacement);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);  // structural equality
bool bool_equal(const BoolPtr& a, const BoolPtr& b);

void collect_vars(const ExprPtr& e, std::vector<bool>& seen);
void collect_vars_bool(const BoolPtr& b, std::vector<bool>& seen);
void collect_vars_cmd(const CmdPtr& c, std::vector<bool>& seen);

// Variables assigned or sampled anywhere in the command.
void collect_written_vars(const CmdPtr& c, std::vector<bool>& written);

// ---- Pretty printing (paper-style bracket notation) ------------------------

std::string to_string(const ExprPtr& e);
std::string to_string(const BoolPtr& b);
std::string to_string(const CmdPtr& c, int indent = 0);
std::string to_string(const Program& p);

}  // namespace exist
