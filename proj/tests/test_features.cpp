#include <set>

#include "doctest.h"
#include "exist/eval.hpp"
#include "exist/features.hpp"
#include "exist/parser.hpp"
#include "exist/sampler.hpp"

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

std::set<std::string> names(const FeatureSet& f) {
  std::set<std::string> out;
  for (auto& it : f.items) out.insert(canonical_feature_key(it.expr));
  return out;
}

std::string key(const std::string& src, const VarTablePtr& vars) {
  return canonical_feature_key(parse_expectation(src, vars));
}

}  // namespace

TEST_CASE("geo0 feature lists contain the grammar entries") {
  Program p = geo0();
  auto [fl, fm] = get_features(p, parse_expectation("z", p.vars));
  auto ln = names(fl);
  auto mn = names(fm);
  CHECK(ln.count(key("[flip == 0]", p.vars)));
  CHECK(ln.count(key("z", p.vars)));
  CHECK(ln.count(key("flip", p.vars)));
  CHECK(ln.count(key("p1", p.vars)));
  CHECK(ln.count(key("p1 * p1", p.vars)));
  CHECK(ln.count(key("z * z", p.vars)));
  CHECK(mn.count(key("1 - p1", p.vars)));
  CHECK(mn.count(key("1 + p1", p.vars)));
  CHECK(mn.count(key("p1", p.vars)));
}

TEST_CASE("dedup drops b*b and duplicate pexp") {
  Program p = parse_program(R"(
var b : bool;
while (b == 0) { b := 1; }
)");
  auto [fl, fm] = get_features(p, parse_expectation("b", p.vars));
  // F_l should be {G, b}: pexp duplicates the variable and b*b collapses to b.
  CHECK(fl.size() == 2);
  int count_b = 0;
  for (auto& f : fl.items) {
    if (canonical_feature_key(f.expr) == key("b", p.vars)) ++count_b;
  }
  CHECK(count_b == 1);
}

TEST_CASE("user features join both lists and type as supplied expressions") {
  Program p = parse_program(R"(
var z : bool;
var x : int;
var y : int;
var p : prob;
var c : bool;
feature 1 / p;
while (z != 0) {
  y := y + 1;
  c ~ bernoulli(p);
  if (c) { z := 0; } else { x := x + y; }
}
)",
                            "geoar");
  auto [fl, fm] = get_features(p, parse_expectation("x", p.vars));
  CHECK(names(fl).count(key("1 / p", p.vars)));
  CHECK(names(fm).count(key("1 / p", p.vars)));
  // 1/p is real-typed, so its products with ints appear in F_l.
  CHECK(names(fl).count(key("y * (1 / p)", p.vars)));
  CHECK(names(fl).count(key("(1 / p) * (1 / p)", p.vars)));
}

TEST_CASE("feature lists are deterministic and order-stable") {
  Program p = geo0();
  auto [fl1, fm1] = get_features(p, parse_expectation("z", p.vars));
  auto [fl2, fm2] = get_features(p, parse_expectation("z", p.vars));
  REQUIRE(fl1.size() == fl2.size());
  for (int i = 0; i < fl1.size(); ++i) CHECK(fl1.items[i].name == fl2.items[i].name);
  REQUIRE(fm1.size() == fm2.size());
  for (int i = 0; i < fm1.size(); ++i) CHECK(fm1.items[i].name == fm2.items[i].name);
}

TEST_CASE("feature cap errors out") {
  Program p = parse_program(R"(
var a : int;
var b : int;
var c : int;
var d : int;
var e : int;
var f : int;
var g : int;
var h : int;
while (a > 0) { a := a - 1; }
)");
  CHECK_THROWS_AS(get_features(p, parse_expectation("a", p.vars), 10), std::runtime_error);
}

TEST_CASE("every feature evaluates on every sampled state") {
  Program p = parse_program(R"(
var z : bool;
var x : int;
var y : int;
var p : prob;
var c : bool;
feature 1 / p;
while (z != 0) {
  y := y + 1;
  c ~ bernoulli(p);
  if (c) { z := 0; } else { x := x + y; }
}
)",
                            "geoar");
  auto [fl, fm] = get_features(p, parse_expectation("x", p.vars));
  SamplingDomain dom;
  auto states = sample_states(p, 200, dom, RandomStream(5));
  for (auto& s : states) {
    for (auto& f : fl.items) CHECK(std::isfinite(eval_expr(f.expr, s)));
    for (auto& f : fm.items) CHECK(std::isfinite(eval_expr(f.expr, s)));
  }
}
