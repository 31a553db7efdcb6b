#include <cmath>

#include "doctest.h"
#include "exist/eval.hpp"
#include "exist/model_tree.hpp"
#include "exist/parser.hpp"
#include "exist/wpe.hpp"

using namespace exist;

namespace {

Program geo_fig3() {
  return parse_program(R"(
var x : bool;
var n : int;
var p : prob;
feature 1 / p;
while (x == 0) {
  n := n + 1;
  x ~ bernoulli(p);
}
)",
                       "geo");
}

// Feature set {x, n, 1/p} for hand-built trees.
FeatureSet fig3_features(const Program& p, LeafKind kind) {
  FeatureSet f;
  f.kind = kind;
  f.items.push_back({"x", parse_expectation("x", p.vars), ExprType::Bool});
  f.items.push_back({"n", parse_expectation("n", p.vars), ExprType::Int});
  f.items.push_back({"1/p", parse_expectation("1 / p", p.vars), ExprType::Real});
  return f;
}

LeafModel linear_leaf(std::vector<Rat> coef, Rat intercept) {
  LeafModel m;
  m.kind = LeafKind::Linear;
  m.coef = std::move(coef);
  m.intercept = std::move(intercept);
  return m;
}

// Fig. 3 trees: split on x == 0, false -> n, true -> n + w * (1/p).
ModelTree fig3_tree(const Rat& w) {
  auto leaf_n = std::make_shared<TreeNode>();
  leaf_n->is_leaf = true;
  leaf_n->model = linear_leaf({Rat(0), Rat(1), Rat(0)}, Rat(0));
  auto leaf_np = std::make_shared<TreeNode>();
  leaf_np->is_leaf = true;
  leaf_np->model = linear_leaf({Rat(0), Rat(1), w}, Rat(0));
  auto root = std::make_shared<TreeNode>();
  root->is_leaf = false;
  root->feature = 0;
  root->op = CmpOp::Eq;
  root->cut = Rat(0);
  root->left = leaf_n;
  root->right = leaf_np;
  ModelTree t;
  t.kind = LeafKind::Linear;
  t.nfeatures = 3;
  t.root = root;
  return t;
}

}  // namespace

TEST_CASE("tree_eval routes and applies leaf models") {
  Program p = geo_fig3();
  // Single-leaf tree: n + 1/p.
  ModelTree leaf_only;
  leaf_only.kind = LeafKind::Linear;
  leaf_only.nfeatures = 3;
  auto leaf = std::make_shared<TreeNode>();
  leaf->is_leaf = true;
  leaf->model = linear_leaf({Rat(0), Rat(1), Rat(1)}, Rat(0));
  leaf_only.root = leaf;
  CHECK(tree_eval(leaf_only, {0.0, 3.0, 4.0}) == 7.0);

  // Fig. 3b at x=0, n=3, p=0.25 -> 7; Fig. 3c at x=0, n=0, p=0.5 -> 1.9.
  CHECK(tree_eval(fig3_tree(Rat(1)), {0.0, 3.0, 4.0}) == 7.0);
  CHECK(tree_eval(fig3_tree(Rat(19, 20)), {0.0, 0.0, 2.0}) == doctest::Approx(1.9));
  // x != 0 routes to the left leaf.
  CHECK(tree_eval(fig3_tree(Rat(1)), {1.0, 3.0, 4.0}) == 3.0);
}

TEST_CASE("loss_exact matches the definition") {
  Program p = geo_fig3();
  FeatureSet feats = fig3_features(p, LeafKind::Linear);
  ExprPtr post = parse_expectation("n", p.vars);

  // Guard-false row contributes zero regardless of the tree.
  ExactDataset d1;
  StateD off(p.vars->size(), 0.0);
  off[p.vars->lookup("x")] = 1.0;
  off[p.vars->lookup("n")] = 5.0;
  off[p.vars->lookup("p")] = 0.5;
  d1.rows.push_back({off, 5.0, 10});
  CHECK(loss_exact(fig3_tree(Rat(1)), d1, post, p.guard, feats) == 0.0);

  // postE(s)=0, G(s)=1, T=1, v=3 -> loss 2.
  Program q = parse_program(R"(
var g : int;
while (g > 0) { g := g - 1; }
)");
  FeatureSet qf;
  qf.kind = LeafKind::Linear;
  qf.items.push_back({"g", parse_expectation("g", q.vars), ExprType::Int});
  ModelTree one;
  one.kind = LeafKind::Linear;
  one.nfeatures = 1;
  auto leaf = std::make_shared<TreeNode>();
  leaf->is_leaf = true;
  leaf->model = linear_leaf({Rat(0)}, Rat(1));
  one.root = leaf;
  ExactDataset d2;
  d2.rows.push_back({StateD{2.0}, 3.0, 1});
  CHECK(loss_exact(one, d2, parse_expectation("0", q.vars), q.guard, qf) == doctest::Approx(2.0));
}

TEST_CASE("noise-free linear recovery through a user feature") {
  Program p = geo_fig3();
  auto [fl, fm] = get_features(p, parse_expectation("n", p.vars));
  // Residual targets generated exactly as 2 * (1/p).
  ExactDataset d;
  for (int i = 0; i < 60; ++i) {
    StateD s(p.vars->size(), 0.0);
    s[p.vars->lookup("x")] = 0.0;
    s[p.vars->lookup("n")] = static_cast<double>(i % 7);
    s[p.vars->lookup("p")] = 0.1 + 0.8 * (i / 59.0);
    double v = s[p.vars->lookup("n")] + 2.0 / s[p.vars->lookup("p")];
    d.rows.push_back({s, v, 1});
  }
  FitConfig cfg;
  ModelTree t = fit_model_tree(d, fl, parse_expectation("n", p.vars), p.guard, cfg);
  CHECK(t.node_count() == 1);
  // Find the 1/p feature and check its coefficient.
  int idx = -1;
  for (int i = 0; i < fl.size(); ++i) {
    if (fl.items[i].name == "1 / p") idx = i;
  }
  REQUIRE(idx >= 0);
  REQUIRE(t.root->is_leaf);
  CHECK(std::abs(rat_to_double(t.root->model.coef[idx]) - 2.0) < 1e-6);
  CHECK(loss_exact(t, d, parse_expectation("n", p.vars), p.guard, fl) < 1e-7);
}

TEST_CASE("constant targets give a single intercept leaf") {
  Program p = geo_fig3();
  auto [fl, fm] = get_features(p, parse_expectation("n", p.vars));
  ExactDataset d;
  for (int i = 0; i < 40; ++i) {
    StateD s(p.vars->size(), 0.0);
    s[p.vars->lookup("n")] = static_cast<double>(i % 5);
    s[p.vars->lookup("p")] = 0.1 + 0.02 * i;
    double v = s[p.vars->lookup("n")] + 4.25;
    d.rows.push_back({s, v, 1});
  }
  FitConfig cfg;
  ModelTree t = fit_model_tree(d, fl, parse_expectation("n", p.vars), p.guard, cfg);
  REQUIRE(t.root->is_leaf);
  CHECK(std::abs(rat_to_double(t.root->model.intercept) - 4.25) < 1e-6);
  for (auto& c : t.root->model.coef) CHECK(std::abs(rat_to_double(c)) < 1e-6);
}

TEST_CASE("multiplicative fit recovers (1-p)/p in log domain") {
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
  auto [fl, fm] = get_features(p, parse_expectation("z", p.vars));
  ExactDataset d;
  for (int i = 0; i < 80; ++i) {
    StateD s(p.vars->size(), 0.0);
    s[p.vars->lookup("z")] = static_cast<double>(i % 6);
    s[p.vars->lookup("p1")] = 0.1 + 0.8 * (i / 79.0);
    double v = s[p.vars->lookup("z")] + (1 - s[p.vars->lookup("p1")]) / s[p.vars->lookup("p1")];
    d.rows.push_back({s, v, 1});
  }
  FitConfig cfg;
  ModelTree t = fit_model_tree(d, fm, parse_expectation("z", p.vars), p.guard, cfg);
  ModelTree r = round_tree(t, RoundingScheme::Int);
  REQUIRE(r.root->is_leaf);
  CHECK(rat_to_double(r.root->model.intercept) == doctest::Approx(1.0));
  int ip = -1, iq = -1;
  for (int i = 0; i < fm.size(); ++i) {
    if (fm.items[i].name == "p1") ip = i;
    if (fm.items[i].name == "1 - p1") iq = i;
  }
  REQUIRE(ip >= 0);
  REQUIRE(iq >= 0);
  CHECK(r.root->model.coef[ip] == Rat(-1));
  CHECK(r.root->model.coef[iq] == Rat(1));
}

TEST_CASE("rounding schemes") {
  // Fig. 3c -> Fig. 3b under the integer scheme.
  ModelTree c = fig3_tree(Rat(19, 20));
  ModelTree b = round_tree(c, RoundingScheme::Int);
  CHECK(b.root->right->model.coef[2] == Rat(1));
  // Idempotence per scheme.
  ModelTree b2 = round_tree(b, RoundingScheme::Int);
  CHECK(b2.root->right->model.coef[2] == Rat(1));
  // Already-integral coefficients unchanged.
  ModelTree i1 = round_tree(fig3_tree(Rat(1)), RoundingScheme::TwoDigit);
  CHECK(i1.root->right->model.coef[2] == Rat(1));

  // Multiplicative leaf 1.04 * p^0.98 -> 1-digit -> 1.0 * p^1.
  LeafModel m;
  m.kind = LeafKind::Multiplicative;
  m.coef = {rat_from_double(0.98)};
  m.intercept = rat_from_double(1.04);
  auto leaf = std::make_shared<TreeNode>();
  leaf->is_leaf = true;
  leaf->model = m;
  ModelTree mt;
  mt.kind = LeafKind::Multiplicative;
  mt.nfeatures = 1;
  mt.root = leaf;
  ModelTree rounded = round_tree(mt, RoundingScheme::OneDigit);
  CHECK(rounded.root->model.intercept == Rat(1));
  CHECK(rounded.root->model.coef[0] == Rat(1));
}

TEST_CASE("tree_to_expectation agrees with tree_eval") {
  Program p = geo_fig3();
  FeatureSet feats = fig3_features(p, LeafKind::Linear);
  // Fig. 3b tree -> [x != 0] * n + [x = 0] * (n + 1/p) (as a value).
  ModelTree t = fig3_tree(Rat(1));
  ExprPtr e = tree_to_expectation(t, feats);
  RandomStream rng(5);
  for (int i = 0; i < 100; ++i) {
    RandomStream sub = rng.split(i);
    StateD s(p.vars->size());
    s[p.vars->lookup("x")] = static_cast<double>(sub.uniform_int(0, 1));
    s[p.vars->lookup("n")] = static_cast<double>(sub.uniform_int(0, 10));
    s[p.vars->lookup("p")] = sub.uniform_real(0.1, 0.9);
    std::vector<double> fv = feats.eval(s);
    CHECK(std::abs(eval_expectation(e, s) - tree_eval(t, fv)) <= 1e-9);
  }
  // Single linear leaf n + 1/p.
  ModelTree leaf_only;
  leaf_only.kind = LeafKind::Linear;
  leaf_only.nfeatures = 3;
  auto leaf = std::make_shared<TreeNode>();
  leaf->is_leaf = true;
  leaf->model = linear_leaf({Rat(0), Rat(1), Rat(1)}, Rat(0));
  leaf_only.root = leaf;
  CHECK(to_string(tree_to_expectation(leaf_only, feats)) == "n + 1 / p");
}

TEST_CASE("form_candidate builds postE + [G] * Iprime") {
  Program p = geo_fig3();
  ExprPtr post = parse_expectation("n", p.vars);
  // Iprime = 0 -> postE.
  ExprPtr c0 = form_candidate(post, p.guard, mk_const_int(0));
  StateD s(p.vars->size(), 0.0);
  s[p.vars->lookup("n")] = 3;
  CHECK(eval_expectation(c0, s) == 3.0);
  // geo: n + [x == 0] * (1/p) equals the Fig. 3b value everywhere.
  ExprPtr c1 = form_candidate(post, p.guard, parse_expectation("1 / p", p.vars));
  ExprPtr fig3b = parse_expectation("[x != 0] * n + [x == 0] * (n + 1 / p)", p.vars);
  RandomStream rng(6);
  for (int i = 0; i < 50; ++i) {
    RandomStream sub = rng.split(i);
    StateD t(p.vars->size());
    t[p.vars->lookup("x")] = static_cast<double>(sub.uniform_int(0, 1));
    t[p.vars->lookup("n")] = static_cast<double>(sub.uniform_int(0, 10));
    t[p.vars->lookup("p")] = sub.uniform_real(0.1, 0.9);
    CHECK(eval_expectation(c1, t) == doctest::Approx(eval_expectation(fig3b, t)));
  }
}

TEST_CASE("depth-2 noise-free tree recovery") {
  Program p = geo_fig3();
  auto [fl, fm] = get_features(p, parse_expectation("n", p.vars));
  // Target: if n <= 3 then 2*n else 5*(1/p), noise-free.
  ExactDataset d;
  RandomStream rng(77);
  for (int i = 0; i < 200; ++i) {
    RandomStream sub = rng.split(i);
    StateD s(p.vars->size(), 0.0);
    s[p.vars->lookup("x")] = 0.0;
    s[p.vars->lookup("n")] = static_cast<double>(sub.uniform_int(0, 10));
    s[p.vars->lookup("p")] = sub.uniform_real(0.1, 0.9);
    double iprime = s[p.vars->lookup("n")] <= 3 ? 2.0 * s[p.vars->lookup("n")]
                                                : 5.0 / s[p.vars->lookup("p")];
    d.rows.push_back({s, s[p.vars->lookup("n")] + iprime, 1});
  }
  FitConfig cfg;
  ModelTree t = fit_model_tree(d, fl, parse_expectation("n", p.vars), p.guard, cfg);
  CHECK(loss_exact(t, d, parse_expectation("n", p.vars), p.guard, fl) <= 1e-8);
}

TEST_CASE("each accepted split does not increase training loss") {
  Program p = geo_fig3();
  auto [fl, fm] = get_features(p, parse_expectation("n", p.vars));
  ExprPtr post = parse_expectation("n", p.vars);
  ExactDataset d;
  RandomStream rng(31);
  for (int i = 0; i < 150; ++i) {
    RandomStream sub = rng.split(i);
    StateD s(p.vars->size(), 0.0);
    s[p.vars->lookup("n")] = static_cast<double>(sub.uniform_int(0, 10));
    s[p.vars->lookup("p")] = sub.uniform_real(0.1, 0.9);
    double v = s[p.vars->lookup("n")] + (s[p.vars->lookup("n")] > 5 ? 3.0 : 1.0) +
               0.05 * sub.uniform_real(-1, 1);
    d.rows.push_back({s, v, 1});
  }
  FitConfig deep;
  deep.max_depth = 2;
  FitConfig shallow;
  shallow.max_depth = 0;
  ModelTree t_deep = fit_model_tree(d, fl, post, p.guard, deep);
  ModelTree t_shallow = fit_model_tree(d, fl, post, p.guard, shallow);
  CHECK(loss_exact(t_deep, d, post, p.guard, fl) <=
        loss_exact(t_shallow, d, post, p.guard, fl) + 1e-12);
}
