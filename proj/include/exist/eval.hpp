#pragma once

#include <stdexcept>

#include "exist/ast.hpp"
#include "exist/rng.hpp"

namespace exist {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MaxIterationsExceeded : std::runtime_error {
  explicit MaxIterationsExceeded(std::string state_desc)
      : std::runtime_error("loop exceeded the iteration budget from state " + state_desc),
        state(std::move(state_desc)) {}
  std::string state;
};

// Expression evaluation. The double overloads drive sampling and learning,
// the rational overloads drive symbolic checks. Products short-circuit on an
// exact zero factor, so [b] * e never evaluates e when [b] = 0.
double eval_expr(const ExprPtr& e, const StateD& s);
bool eval_bool(const BoolPtr& b, const StateD& s);
Rat eval_expr(const ExprPtr& e, const StateR& s);
bool eval_bool(const BoolPtr& b, const StateR& s);

// Expectations are expressions; named aliases keep call sites readable.
inline double eval_expectation(const ExprPtr& e, const StateD& s) { return eval_expr(e, s); }
inline Rat eval_expectation(const ExprPtr& e, const StateR& s) { return eval_expr(e, s); }

// One execution of the loop body from s (the guard is not consulted).
StateD step_body(const Program& prog, const StateD& s, RandomStream& rng);

// Iterates the body while the guard holds; returns the first state falsifying
// the guard. Throws MaxIterationsExceeded when the budget runs out.
StateD run_to_termination(const Program& prog, const StateD& s, RandomStream& rng,
                          long max_iters = 1000000);

std::string describe_state(const StateD& s, const VarTable& vars);

}  // namespace exist
