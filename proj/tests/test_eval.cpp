#include <cmath>

#include "doctest.h"
#include "exist/eval.hpp"
#include "exist/parser.hpp"

using namespace exist;

namespace {

Program geo0() {
  return parse_program(R"(
var z : int;
var flip : bool;
var p1 : prob;
var d : bool;
while (flip == 0) {
  d ~ bernoulli(p1);
  if (d) { flip := 1; } else { z := z + 1; }
}
)",
                       "geo0");
}

Program detm() {
  return parse_program(R"(
var x : int;
var count : int;
while (x <= 10) {
  x := x + 1;
  count := count + 1;
}
)",
                       "detm");
}

StateD mk_state(const Program& p, std::initializer_list<std::pair<const char*, double>> vals) {
  StateD s(p.vars->size(), 0.0);
  for (auto& [n, v] : vals) s[p.vars->lookup(n)] = v;
  return s;
}

}  // namespace

TEST_CASE("basic expression evaluation") {
  Program p = parse_program("var n : int;\nwhile (n > 0) { n := n - 1; }");
  StateD s{3.0};
  CHECK(eval_expr(parse_expectation("n + 1", p.vars), s) == 4.0);
  CHECK(eval_bool(parse_expectation("[n == 3]", p.vars)->cond, s));
  StateR r{Rat(3)};
  CHECK(eval_expr(parse_expectation("n / 2", p.vars), r) == Rat(3, 2));
}

TEST_CASE("division by zero is an evaluation error") {
  Program p = parse_program("var p : prob;\nwhile (p > 0) { skip; }");
  StateD s{0.0};
  CHECK_THROWS_AS(eval_expr(parse_expectation("1 / p", p.vars), s), EvalError);
}

TEST_CASE("indicator-guarded division short-circuits") {
  Program pr = parse_program("var x : int;\nvar n : int;\nvar p : prob;\nwhile (x == 0) { x := 1; }");
  ExprPtr e = parse_expectation("[x != 0] * n + [x == 0] * (n + 1 / p)", pr.vars);
  StateD hit(pr.vars->size());
  hit[pr.vars->lookup("x")] = 0;
  hit[pr.vars->lookup("n")] = 3;
  hit[pr.vars->lookup("p")] = 0.25;
  CHECK(eval_expectation(e, hit) == doctest::Approx(7.0));
  StateD miss = hit;
  miss[pr.vars->lookup("x")] = 1;
  miss[pr.vars->lookup("p")] = 0.0;  // 1/p unevaluated
  CHECK(eval_expectation(e, miss) == 3.0);
  StateR miss_r = state_to_rational(miss);
  CHECK(eval_expectation(e, miss_r) == Rat(3));
}

TEST_CASE("deterministic body step") {
  Program p = detm();
  RandomStream rng(5);
  StateD s = mk_state(p, {{"x", 3.0}, {"count", 0.0}});
  StateD t = step_body(p, s, rng);
  CHECK(t[p.vars->lookup("x")] == 4.0);
  CHECK(t[p.vars->lookup("count")] == 1.0);
}

TEST_CASE("bernoulli(1) forces the branch") {
  Program p = geo0();
  RandomStream rng(1);
  StateD s = mk_state(p, {{"flip", 0.0}, {"z", 5.0}, {"p1", 1.0}});
  for (int i = 0; i < 20; ++i) {
    StateD t = step_body(p, s, rng);
    CHECK(t[p.vars->lookup("flip")] == 1.0);
    CHECK(t[p.vars->lookup("z")] == 5.0);
  }
}

TEST_CASE("branch frequency matches the bernoulli parameter") {
  Program p = geo0();
  RandomStream rng(11);
  StateD s = mk_state(p, {{"flip", 0.0}, {"z", 0.0}, {"p1", 0.5}});
  int n = 10000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    RandomStream sub = rng.split(i);
    StateD t = step_body(p, s, sub);
    hits += t[p.vars->lookup("flip")] == 1.0;
  }
  double frac = static_cast<double>(hits) / n;
  CHECK(std::abs(frac - 0.5) < 0.02);
}

TEST_CASE("run_to_termination returns immediately when the guard is false") {
  Program p = geo0();
  RandomStream rng(3);
  StateD s = mk_state(p, {{"flip", 1.0}, {"z", 0.0}, {"p1", 0.5}});
  StateD t = run_to_termination(p, s, rng);
  CHECK(t == s);
}

TEST_CASE("geometric mean of z at termination") {
  Program p = geo0();
  RandomStream rng(17);
  int zi = p.vars->lookup("z");
  double sum = 0;
  int runs = 500;
  for (int i = 0; i < runs; ++i) {
    RandomStream sub = rng.split(i);
    StateD s = mk_state(p, {{"flip", 0.0}, {"z", 0.0}, {"p1", 0.5}});
    sum += run_to_termination(p, s, sub)[zi];
  }
  // E[z] = (1-p)/p = 1 at p = 0.5
  CHECK(std::abs(sum / runs - 1.0) < 0.2);
}

TEST_CASE("nonterminating guard hits the iteration budget") {
  Program p = parse_program("var x : int;\nwhile (true) { x := x + 1; }");
  RandomStream rng(1);
  StateD s{0.0};
  CHECK_THROWS_AS(run_to_termination(p, s, rng, 1000), MaxIterationsExceeded);
}

TEST_CASE("identical seeds give identical traces and unassigned vars are preserved") {
  Program p = geo0();
  StateD s = mk_state(p, {{"flip", 0.0}, {"z", 2.0}, {"p1", 0.3}});
  RandomStream a(99), b(99);
  StateD ta = run_to_termination(p, s, a);
  StateD tb = run_to_termination(p, s, b);
  CHECK(ta == tb);
  CHECK(ta[p.vars->lookup("p1")] == 0.3);  // p1 never assigned by the body
}

TEST_CASE("discrete sampling follows the weights") {
  Program p = parse_program(R"(
var x : int;
var p2 : prob;
while (x == 0) {
  x ~ discrete(-1 @ p2, 1 @ 1 - p2);
}
)");
  RandomStream rng(7);
  int n = 10000;
  int minus = 0;
  StateD s(p.vars->size(), 0.0);
  s[p.vars->lookup("p2")] = 0.3;
  for (int i = 0; i < n; ++i) {
    RandomStream sub = rng.split(i);
    StateD t = step_body(p, s, sub);
    minus += t[p.vars->lookup("x")] == -1.0;
  }
  CHECK(std::abs(minus / static_cast<double>(n) - 0.3) < 0.02);
}
