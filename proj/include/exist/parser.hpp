#pragma once

#include <stdexcept>
#include <string>

#include "exist/ast.hpp"

namespace exist {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")"),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Expression types for static checks and feature classification.
enum class ExprType { Bool, Int, Prob, Real };

// Parses a .pw program:
//   var <name> : bool|int|prob|real;   (one per line, any number)
//   feature <expr>;                    (optional user-supplied features)
//   while (<boolexpr>) { <stmts> }
// Statements: skip; x := e; x = e; x ~ bernoulli(e); x ~ discrete(v @ w, ...);
// if (b) { ... } [else { ... }].  '#' and '//' start comments.
Program parse_program(const std::string& text, const std::string& name = "");

// Parses an expectation over an existing variable table. Indicator terms use
// bracket syntax: "n + [x == 0] * (1 / p)".
ExprPtr parse_expectation(const std::string& text, const VarTablePtr& vars);

// Infers the type of a well-formed expression (bool-valued pieces type as
// Bool, which arithmetic contexts treat as {0,1}).
ExprType infer_type(const ExprPtr& e, const VarTable& vars);

}  // namespace exist
