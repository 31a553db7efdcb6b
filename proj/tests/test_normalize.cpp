#include <cmath>

#include "doctest.h"
#include "exist/eval.hpp"
#include "exist/normalize.hpp"
#include "exist/parser.hpp"
#include "exist/rng.hpp"

using namespace exist;

namespace {

VarTablePtr make_vars(std::initializer_list<std::pair<const char*, VarType>> decls) {
  auto t = std::make_shared<VarTable>();
  for (auto& [n, ty] : decls) t->add(n, ty);
  return t;
}

ExprPtr expr(const std::string& s, const VarTablePtr& v) { return parse_expectation(s, v); }

}  // namespace

TEST_CASE("guarded cancellation: [x=0]*(n+1/p) - [x=0]*n") {
  auto v = make_vars({{"x", VarType::Int}, {"n", VarType::Int}, {"p", VarType::Prob}});
  ExprPtr d = expr("[x == 0] * (n + 1 / p) - [x == 0] * n", v);
  GuardedRationalForm f = normalize(d, v);
  REQUIRE(f.blocks.size() == 1);
  REQUIRE(f.blocks[0].regions.size() == 2);
  // Region with x == 0 true evaluates to 1/p; the other region to 0.
  StateR s_eq{Rat(0), Rat(3), Rat(1, 4)};
  CHECK(eval_form(f, s_eq) == Rat(4));
  StateR s_ne{Rat(2), Rat(3), Rat(1, 4)};
  CHECK(eval_form(f, s_ne) == Rat(0));
  CHECK(!form_is_identically_zero(f));
}

TEST_CASE("geo hand expansion is identically zero") {
  auto v = make_vars({{"n", VarType::Int}, {"p", VarType::Prob}});
  ExprPtr d = expr("n + 1 / p - (p * (n + 1) + (1 - p) * (n + 1 + 1 / p))", v);
  GuardedRationalForm f = normalize(d, v);
  CHECK(f.region_count() == 1);
  CHECK(form_is_identically_zero(f));
  StateR s{Rat(5), Rat(1, 3)};
  CHECK(eval_form(f, s) == Rat(0));
}

TEST_CASE("mart-style split: [b>0]*(1/p) + rounds") {
  auto v = make_vars({{"b", VarType::Int}, {"rounds", VarType::Int}, {"p", VarType::Prob}});
  ExprPtr d = expr("[b > 0] * (1 / p) + rounds", v);
  GuardedRationalForm f = normalize(d, v);
  REQUIRE(f.blocks.size() == 1);
  CHECK(f.blocks[0].regions.size() == 2);
  StateR in{Rat(2), Rat(7), Rat(1, 2)};
  CHECK(eval_form(f, in) == Rat(9));
  StateR out{Rat(0), Rat(7), Rat(1, 2)};
  CHECK(eval_form(f, out) == Rat(7));
}

TEST_CASE("infeasible atom assignments are pruned") {
  auto v = make_vars({{"x", VarType::Real}});
  ExprPtr d = expr("[x < 0] * [x > 1] * x + [x >= 0] * x", v);
  GuardedRationalForm f = normalize(d, v);
  for (auto& block : f.blocks) {
    for (auto& region : block.regions) {
      // No region may assert both x < 0 and x > 1.
      bool lt0 = false, gt1 = false;
      for (size_t i = 0; i < block.atoms.size(); ++i) {
        // Identify atoms by evaluating on witnesses.
        StateR neg{Rat(-1)};
        StateR big{Rat(2)};
        bool holds_neg = false, holds_big = false;
        Rat vn = block.atoms[i].form.eval(neg);
        Rat vb = block.atoms[i].form.eval(big);
        switch (block.atoms[i].rel) {
          case LinRel::Le: holds_neg = vn <= 0; holds_big = vb <= 0; break;
          case LinRel::Lt: holds_neg = vn < 0; holds_big = vb < 0; break;
          case LinRel::Eq: holds_neg = vn == 0; holds_big = vb == 0; break;
        }
        if (region.atom_truth[i] && holds_neg && !holds_big) lt0 = true;
        if (region.atom_truth[i] && holds_big && !holds_neg) gt1 = true;
      }
      CHECK(!(lt0 && gt1));
    }
  }
}

TEST_CASE("integer tightening unifies x > 0 with x - 1 >= 0") {
  auto v = make_vars({{"x", VarType::Int}});
  ExprPtr d = expr("[x > 0] * x - [x - 1 >= 0] * x", v);
  GuardedRationalForm f = normalize(d, v);
  REQUIRE(f.blocks.size() == 1);
  CHECK(f.blocks[0].atoms.size() == 1);  // same canonical atom
  CHECK(form_is_identically_zero(f));
}

TEST_CASE("implied integer equalities decide boundary regions") {
  auto vi = make_vars({{"n", VarType::Int}, {"M", VarType::Int}});
  // On integers, n < M and n >= M-1 pin n = M-1, so M - n - 1 vanishes.
  ExprPtr d = expr("[n < M && n >= M - 1] * (M - n - 1)", vi);
  CHECK(form_is_identically_zero(normalize(d, vi)));

  auto vr = make_vars({{"n", VarType::Real}, {"M", VarType::Real}});
  ExprPtr dr = expr("[n < M && n >= M - 1] * (M - n - 1)", vr);
  CHECK(!form_is_identically_zero(normalize(dr, vr)));
}

TEST_CASE("boolean variables are enumerated into blocks") {
  auto v = make_vars({{"c1", VarType::Bool}, {"c2", VarType::Bool}, {"count", VarType::Int}});
  ExprPtr d = expr("[c1 + c2 == 0] * 5 + count", v);
  GuardedRationalForm f = normalize(d, v);
  CHECK(f.bool_vars.size() == 2);
  CHECK(f.blocks.size() == 4);
  StateR both_zero{Rat(0), Rat(0), Rat(3)};
  CHECK(eval_form(f, both_zero) == Rat(8));
  StateR one_set{Rat(1), Rat(0), Rat(3)};
  CHECK(eval_form(f, one_set) == Rat(3));
}

TEST_CASE("atom cap raises a region-explosion error") {
  auto v = make_vars({{"x", VarType::Real}});
  std::string s = "x";
  for (int i = 1; i <= 6; ++i) s += " + [x > " + std::to_string(i) + "] * x";
  CHECK_THROWS_AS(normalize(expr(s, v), v, 4), NormalizeError);
  CHECK_NOTHROW(normalize(expr(s, v), v, 12));
}

TEST_CASE("nonlinear atoms are rejected") {
  auto v = make_vars({{"x", VarType::Real}, {"y", VarType::Real}});
  CHECK_THROWS_AS(normalize(expr("[x * y > 0] * x", v), v), NormalizeError);
}

TEST_CASE("normalize is semantics-preserving on random states") {
  auto v = make_vars({{"x", VarType::Int},
                      {"n", VarType::Int},
                      {"b", VarType::Bool},
                      {"p", VarType::Prob}});
  std::vector<std::string> exprs = {
      "[x != 0] * n + [x == 0] * (n + 1 / p)",
      "[b == 1] * (n * p + 1) + [x >= 2] * (x * x - p)",
      "(n + 1) * (n + 2) / (p + 1) + [x < n] * p * p",
      "[x > 0 && n <= 4] * (x / p) - [b == 0] * n * n * p",
  };
  RandomStream rng(2024);
  for (auto& src : exprs) {
    ExprPtr e = expr(src, v);
    GuardedRationalForm f = normalize(e, v);
    for (int i = 0; i < 100; ++i) {
      RandomStream sub = rng.split(i);
      StateR s{Rat(sub.uniform_int(-3, 5)), Rat(sub.uniform_int(0, 10)),
               Rat(sub.uniform_int(0, 1)), Rat(sub.uniform_int(1, 9), 10)};
      Rat direct = eval_expectation(e, s);
      Rat via_form = eval_form(f, s);
      CHECK(direct == via_form);
    }
  }
}
