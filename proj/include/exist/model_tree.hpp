#pragma once

#include <memory>

#include "exist/features.hpp"
#include "exist/sampler.hpp"

namespace exist {

// Leaf models: linear  sum coef_i * f_i + intercept,  or multiplicative
// intercept * prod f_i^coef_i  (the intercept slot holds the leading
// constant). Coefficients are exact rationals; learning produces dyadic
// values, rounding produces decimal ones.
struct LeafModel {
  LeafKind kind = LeafKind::Linear;
  std::vector<Rat> coef;
  Rat intercept;
};

struct TreeNode {
  bool is_leaf = true;
  LeafModel model;
  // Internal node: predicate "feature op cut"; true routes to the right child.
  int feature = -1;
  CmpOp op = CmpOp::Le;
  Rat cut;
  std::shared_ptr<const TreeNode> left, right;
};

struct ModelTree {
  LeafKind kind = LeafKind::Linear;
  int nfeatures = 0;
  std::shared_ptr<const TreeNode> root;

  int node_count() const;
  int depth() const;
};

double tree_eval(const ModelTree& tree, const std::vector<double>& fvec);

// err_l / err_m: ( sum_i (postE(s_i) + G(s_i) * T(F(s_i)) - v_i)^2 )^(1/2).
double loss_exact(const ModelTree& tree, const ExactDataset& data, const ExprPtr& postE,
                  const BoolPtr& guard, const FeatureSet& feats);

struct FitConfig {
  int max_depth = 2;
  int min_leaf = 10;
  double min_gain = 1e-3;
  double ridge = 1e-6;
  int max_cuts_per_feature = 16;
};

// Greedy top-down fit against residual targets r_i = v_i - postE(s_i)
// (retained rows all satisfy the guard). Splits are chosen by summed child
// SSE over midpoint cuts; leaves are ridge-regularized least squares, with an
// exact least-squares polish when the node system is well posed.
// Multiplicative trees train in the log domain; rows with nonpositive
// residuals and features that are not strictly positive on the dataset are
// excluded from that fit (a note lands in `warnings`).
ModelTree fit_model_tree(const ExactDataset& data, const FeatureSet& feats, const ExprPtr& postE,
                         const BoolPtr& guard, const FitConfig& cfg,
                         std::vector<std::string>* warnings = nullptr);

enum class RoundingScheme { Int = 0, OneDigit = 1, TwoDigit = 2 };

// Linear trees round every coefficient to the scheme's digits; multiplicative
// trees round the leading constant to the scheme's digits and every exponent
// to an integer. Idempotent per scheme.
ModelTree round_tree(const ModelTree& tree, RoundingScheme scheme);

// Sum over root-to-leaf paths of indicator-weighted leaf expressions, with
// features replaced by their defining expressions. Multiplicative leaves must
// have integer exponents (round first).
ExprPtr tree_to_expectation(const ModelTree& tree, const FeatureSet& feats);

// postE + [G] * Iprime
ExprPtr form_candidate(const ExprPtr& postE, const BoolPtr& guard, const ExprPtr& iprime);

// Specializes the tree to a feature with a known constant value: splits on it
// collapse to the taken branch and leaves absorb its contribution. Used to
// pin the guard-indicator feature to 1 before extraction, since candidates
// only evaluate the tree under [G].
ModelTree pin_feature(const ModelTree& tree, int feature, const Rat& value);

std::string tree_to_text(const ModelTree& tree, const FeatureSet& feats);

}  // namespace exist
