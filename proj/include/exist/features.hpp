#pragma once

#include "exist/ast.hpp"
#include "exist/parser.hpp"

namespace exist {

enum class LeafKind { Linear, Multiplicative };

struct Feature {
  std::string name;
  ExprPtr expr;
  ExprType type;
};

struct FeatureSet {
  LeafKind kind = LeafKind::Linear;
  std::vector<Feature> items;

  int size() const { return static_cast<int>(items.size()); }
  std::vector<double> eval(const StateD& s) const;
};

// Generates the linear-leaf and multiplicative-leaf feature lists from the
// program variables and user-supplied features. Base features are the guard
// indicator, the post-expectation, every program variable and user feature;
// the linear list adds pairwise products within the type classes
// (p*p, n*n, x*x, n*x, b*b) and the multiplicative list adds the sums and
// complements (1+p, 1-p, p+p', p+p'-p*p', n+-n', x+-x', n+-x', b+-b').
// Duplicates are removed under commutative normalization; more than `cap`
// features in either list is an error.
std::pair<FeatureSet, FeatureSet> get_features(const Program& prog, const ExprPtr& pexp,
                                               int cap = 40);

// Normalization key used for deduplication (commutative operand sorting plus
// constant folding already done by the constructors).
std::string canonical_feature_key(const ExprPtr& e);

}  // namespace exist
