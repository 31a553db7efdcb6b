#pragma once

#include <cstdint>

#include "exist/model_tree.hpp"

namespace exist {

// Differentiable model tree: d split features with one trainable cut point
// each (one level per split feature, 2^d leaves), sigmoid routing with
// temperature tau, and a full leaf-parameter matrix. Multiplicative trees
// hold their split cuts and leaf inputs in log space and exponentiate on the
// way out.
struct SoftTree {
  LeafKind kind = LeafKind::Linear;
  int nfeatures = 0;
  std::vector<int> split_feats;               // size d <= 3
  std::vector<double> cuts;                   // size d (log space for multiplicative)
  double tau = 1.0;
  std::vector<std::vector<double>> leaf_coef;  // 2^d rows of (nfeatures + 1), intercept last

  int depth() const { return static_cast<int>(split_feats.size()); }
  int leaves() const { return 1 << depth(); }

  // Parameter packing: cuts, then leaf rows in order. Used by training and
  // the gradient check.
  int param_count() const { return depth() + leaves() * (nfeatures + 1); }
  std::vector<double> pack() const;
  void unpack(const std::vector<double>& params);
};

// Precomputed matrices for the sub-invariant loss. Feature values are stored
// in the tree's internal space (log-clamped for multiplicative trees);
// successor blocks are flattened with row offsets. Aggregates make the
// single-leaf linear case O(K * F) per epoch instead of O(sum |S_i| * F).
struct SubFitData {
  LeafKind kind = LeafKind::Linear;
  int nfeat = 0;
  int rows = 0;
  std::vector<double> pre, post, guard;     // per row
  std::vector<double> x;                    // rows x nfeat, internal space
  std::vector<double> raw_min, raw_max;     // raw-space feature bounds (for harden)
  std::vector<double> feat_scale;           // max(1, max |x_k|); preconditions training
  std::vector<bool> active;                 // multiplicative: strictly positive features
  std::vector<long> succ_offset;            // rows + 1
  std::vector<double> succ_post, succ_guard;
  std::vector<double> succ_x;               // flattened successors x nfeat, internal space
  // Per-row successor aggregates: mean of guard, mean of postE + nothing,
  // mean of guard * features.
  std::vector<double> agg_guard, agg_post;
  std::vector<double> agg_gx;  // rows x nfeat
};

SubFitData prepare_sub_data(const SubDataset& data, const FeatureSet& feats, const ExprPtr& preE,
                            const ExprPtr& postE, const BoolPtr& guard);

// Soft routing forward pass; takes a raw feature vector.
double soft_forward(const SoftTree& st, const std::vector<double>& fvec);

// err1 + err2 of the soft tree on the dataset (see prepare_sub_data).
double sub_loss(const SoftTree& st, const SubFitData& data);
double sub_loss(const SoftTree& st, const SubDataset& data, const ExprPtr& preE,
                const ExprPtr& postE, const BoolPtr& guard, const FeatureSet& feats);

// Analytic gradient over pack() order; hinge subgradient 0 at kinks.
std::vector<double> grad_sub_loss(const SoftTree& st, const SubFitData& data);

// Straightforward reference implementation of the loss and gradient; kept for
// kernel equivalence tests and the kernel benchmark.
double sub_loss_and_grad_reference(const SoftTree& st, const SubFitData& data,
                                   std::vector<double>* grad);
// Production kernel (OpenMP over rows, deterministic reduction).
double sub_loss_and_grad(const SoftTree& st, const SubFitData& data, std::vector<double>* grad);

struct TrainHyper {
  int epochs = 2000;
  double step = 1.0;     // multiplier on the Polyak step loss/|grad|^2
  double decay = 0.01;   // L2 bleed on non-intercept leaf coefficients
  double tau_start = 1.0;
  double tau_end = 1e-3;
  int patience = 250;    // epochs without improvement before stopping
  uint64_t seed = 0;     // restart jitter; 0th restart starts at zeros/medians
  int restart_index = 0;
};

// Gradient descent under a geometric temperature schedule. Steps follow the
// Polyak rule (loss / |grad|^2) with backtracking that halves the step on a
// loss increase. A small L2 bleed on non-intercept leaf coefficients keeps
// the minimizer inside the hinge-feasible slab concentrated, so rounding
// recovers clean constants. Returns the parameters with the lowest observed
// sub_loss. Throws on a non-finite loss at an accepted point. `curve`, when
// given, receives (epoch, loss) checkpoints for the run report.
SoftTree train(SoftTree st, const SubFitData& data, const TrainHyper& hyper,
               std::vector<std::pair<int, double>>* curve = nullptr);

// Smallest |hinge argument| across rows and both error terms; configurations
// near a kink make finite differences disagree with the subgradient.
double min_hinge_margin(const SoftTree& st, const SubFitData& data);

// Builds the initial soft tree for a feature set: split features chosen as
// guard-related features first, then by correlation with the one-step change
// of the post-expectation. d = 0 gives the single-leaf tree.
SoftTree make_soft_tree(const FeatureSet& feats, const SubFitData& data, int d,
                        const TrainHyper& hyper);

// Replaces soft routing with hard predicates f <= c, copies leaves, prunes
// children unreachable under the observed feature bounds, and canonicalizes
// boolean splits to "f == 1".
ModelTree harden(const SoftTree& st, const FeatureSet& feats, const SubFitData& data);

}  // namespace exist
