#include <cmath>

#include "doctest.h"
#include "exist/eval.hpp"
#include "exist/parser.hpp"
#include "exist/verifier.hpp"

using namespace exist;

namespace {

Program geo_fig3() {
  return parse_program(R"(
var x : bool;
var n : int;
var p : prob;
while (x == 0) {
  n := n + 1;
  x ~ bernoulli(p);
}
)",
                       "geo");
}

Program mart() {
  return parse_program(R"(
var c : int;
var b : int;
var rounds : int;
var p : prob;
var d : bool;
while (b > 0) {
  d ~ bernoulli(p);
  if (d) { c := c + b; b := 0; } else { c := c - b; b := 2 * b; }
  rounds := rounds + 1;
}
)",
                       "mart");
}

Program gambler() {
  return parse_program(R"(
var x : int;
var y : int;
var z : int;
var d : bool;
while (0 < x && x < y) {
  d ~ bernoulli(0.5);
  if (d) { x := x + 1; } else { x := x - 1; }
  z := z + 1;
}
)",
                       "gambler");
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

}  // namespace

TEST_CASE("check_exact verifies the mart invariant exactly") {
  Program p = mart();
  ExprPtr inv = parse_expectation("rounds + [b > 0] * (1 / p)", p.vars);
  Verdict v = check_exact(inv, p, parse_expectation("rounds", p.vars), VerificationDomain{});
  CHECK(v.status == VerdictStatus::VerifiedExact);
  REQUIRE(!v.side_conditions.empty());  // denominator p
  CHECK(v.side_conditions[0].find("denominator") != std::string::npos);
}

TEST_CASE("check_exact refutes the perturbed geo invariant with violation exactly 0.05") {
  Program p = geo_fig3();
  ExprPtr inv = parse_expectation("n + [x == 0] * (0.95 / p)", p.vars);
  ExprPtr post = parse_expectation("n", p.vars);
  Verdict v = check_exact(inv, p, post, VerificationDomain{});
  REQUIRE(v.status == VerdictStatus::Refuted);
  REQUIRE(!v.counterexamples.empty());
  ExprPtr D = mk_sub(inv, char_fn_apply(p, post, inv));
  for (auto& cex : v.counterexamples) {
    CHECK(cex.state[p.vars->lookup("x")] == 0.0);
    CHECK(cex.violation == doctest::Approx(0.05));
    // Exact rational recheck: |D| at the counterexample is exactly 1/20.
    Rat exact = eval_expectation(D, state_to_rational(cex.state));
    CHECK(abs(exact) == Rat(1, 20));
  }
}

TEST_CASE("check_exact on a guard-false loop verifies postE trivially") {
  Program p = parse_program("var n : int;\nwhile (false) { n := n + 1; }");
  ExprPtr post = parse_expectation("n", p.vars);
  Verdict v = check_exact(post, p, post, VerificationDomain{});
  CHECK(v.status == VerdictStatus::VerifiedExact);
}

TEST_CASE("VerifiedExact verdicts are numerically sound on random states") {
  Program p = mart();
  ExprPtr inv = parse_expectation("rounds + [b > 0] * (1 / p)", p.vars);
  ExprPtr post = parse_expectation("rounds", p.vars);
  Verdict v = check_exact(inv, p, post, VerificationDomain{});
  REQUIRE(v.status == VerdictStatus::VerifiedExact);
  ExprPtr D = mk_sub(inv, char_fn_apply(p, post, inv));
  auto states = sample_states(p, 2000, SamplingDomain{}, RandomStream(123));
  for (auto& s : states) {
    CHECK(std::abs(eval_expectation(D, s)) <= 1e-9);
  }
}

TEST_CASE("check_sub proves the mart sub-invariant exactly") {
  Program p = mart();
  ExprPtr inv = parse_expectation("rounds + [b > 0] * 1", p.vars);
  Verdict v = check_sub(inv, p, parse_expectation("rounds + [b > 0] * 1", p.vars),
                        parse_expectation("rounds", p.vars), VerificationDomain{});
  CHECK(v.status == VerdictStatus::VerifiedExact);
}

TEST_CASE("check_sub verifies the geo0 sub-invariant (bounded: quadratic region)") {
  Program p = parse_program(R"(
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
  ExprPtr inv = parse_expectation("z + [flip == 0] * (1 - p1)", p.vars);
  Verdict v = check_sub(inv, p, parse_expectation("z + [flip == 0] * (1 - p1)", p.vars),
                        parse_expectation("z", p.vars), VerificationDomain{});
  CHECK((v.status == VerdictStatus::VerifiedExact || v.status == VerdictStatus::VerifiedBounded));
  CHECK(v.status != VerdictStatus::Refuted);
}

TEST_CASE("check_sub refutes the z-free gambler candidate with margin 1") {
  Program p = gambler();
  ExprPtr inv = parse_expectation("x * (y - x)", p.vars);
  Verdict v = check_sub(inv, p, parse_expectation("x * (y - x)", p.vars),
                        parse_expectation("z", p.vars), VerificationDomain{});
  REQUIRE(v.status == VerdictStatus::Refuted);
  REQUIRE(!v.counterexamples.empty());
  // The one-step expectation drops by exactly 1 on every guard-true state.
  CHECK(v.counterexamples[0].violation == doctest::Approx(1.0));
}

TEST_CASE("check_sub with preE = 0 and inv = postE verifies detm") {
  Program p = detm();
  ExprPtr post = parse_expectation("count", p.vars);
  Verdict v =
      check_sub(post, p, parse_expectation("0", p.vars), post, VerificationDomain{});
  CHECK(v.status == VerdictStatus::VerifiedExact);
}

TEST_CASE("find_counterexamples locates indicator plateaus") {
  Program p = geo_fig3();
  ExprPtr D = parse_expectation("[x == 0] * 0.05", p.vars);
  auto cexs = find_counterexamples(D, p, VerificationDomain{}, 5, RandomStream(1));
  REQUIRE(!cexs.empty());
  for (auto& c : cexs) {
    CHECK(c.state[p.vars->lookup("x")] == 0.0);
    CHECK(c.violation == doctest::Approx(0.05));
  }
}

TEST_CASE("find_counterexamples returns empty for the zero objective") {
  Program p = geo_fig3();
  ExprPtr D = parse_expectation("0 * n", p.vars);
  CHECK(find_counterexamples(D, p, VerificationDomain{}, 5, RandomStream(2)).empty());
}

TEST_CASE("find_counterexamples climbs a monotone objective to the boundary") {
  Program p = geo_fig3();
  ExprPtr D = parse_expectation("p - 0.5", p.vars);
  auto cexs = find_counterexamples(D, p, VerificationDomain{}, 3, RandomStream(3));
  REQUIRE(!cexs.empty());
  CHECK(cexs[0].violation == doctest::Approx(0.4).epsilon(1e-4));
  CHECK(cexs[0].state[p.vars->lookup("p")] == doctest::Approx(0.9).epsilon(1e-4));
}

TEST_CASE("refutation witnesses re-evaluate to positive violations") {
  Program p = detm();
  // Perturbed detm invariant: count + [x <= 10] * 0.95 * (11 - x).
  ExprPtr inv = parse_expectation("count + [x <= 10] * (0.95 * (11 - x))", p.vars);
  ExprPtr post = parse_expectation("count", p.vars);
  Verdict v = check_exact(inv, p, post, VerificationDomain{});
  REQUIRE(v.status == VerdictStatus::Refuted);
  ExprPtr D = mk_sub(inv, char_fn_apply(p, post, inv));
  for (auto& cex : v.counterexamples) {
    CHECK(std::abs(eval_expectation(D, cex.state)) > 0.0);
    CHECK(std::abs(eval_expectation(D, cex.state)) == doctest::Approx(cex.violation));
  }
}

TEST_CASE("semantic equality identifies the collapsed geo0 artifact split") {
  Program p = parse_program(R"(
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
  ExprPtr split = parse_expectation(
      "[flip == 0] * ([z <= 0.127] * ((1 - p1) / p1) + [z > 0.127] * ((1 - p1) / p1)) + z",
      p.vars);
  ExprPtr collapsed = parse_expectation("z + [flip == 0] * ((1 - p1) / p1)", p.vars);
  CHECK(expectations_semantically_equal(split, collapsed, p.vars));
  ExprPtr wrong = parse_expectation("z + [flip == 0] * (1 / p1)", p.vars);
  CHECK(!expectations_semantically_equal(split, wrong, p.vars));
}

TEST_CASE("check_exact verifies the gambler invariant (nonlinear leaf, linear atoms)") {
  Program p = gambler();
  ExprPtr inv = parse_expectation("z + [0 < x && x < y] * (x * (y - x))", p.vars);
  Verdict v = check_exact(inv, p, parse_expectation("z", p.vars), VerificationDomain{});
  CHECK(v.status == VerdictStatus::VerifiedExact);
}
