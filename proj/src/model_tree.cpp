#include "exist/model_tree.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "exist/eval.hpp"

namespace exist {

namespace {

int count_nodes(const TreeNode* n) {
  if (!n) return 0;
  if (n->is_leaf) return 1;
  return 1 + count_nodes(n->left.get()) + count_nodes(n->right.get());
}

int node_depth(const TreeNode* n) {
  if (!n || n->is_leaf) return 0;
  return 1 + std::max(node_depth(n->left.get()), node_depth(n->right.get()));
}

bool predicate_holds(const TreeNode& n, double f) {
  double c = rat_to_double(n.cut);
  switch (n.op) {
    case CmpOp::Lt: return f < c;
    case CmpOp::Le: return f <= c;
    case CmpOp::Eq: return f == c;
    case CmpOp::Ne: return f != c;
    case CmpOp::Gt: return f > c;
    case CmpOp::Ge: return f >= c;
  }
  return false;
}

double leaf_value(const LeafModel& m, const std::vector<double>& fvec) {
  if (m.kind == LeafKind::Linear) {
    double out = rat_to_double(m.intercept);
    for (size_t i = 0; i < m.coef.size(); ++i) {
      if (m.coef[i] != 0) out += rat_to_double(m.coef[i]) * fvec[i];
    }
    return out;
  }
  double out = rat_to_double(m.intercept);
  for (size_t i = 0; i < m.coef.size(); ++i) {
    if (m.coef[i] != 0) out *= std::pow(fvec[i], rat_to_double(m.coef[i]));
  }
  return out;
}

}  // namespace

int ModelTree::node_count() const { return count_nodes(root.get()); }
int ModelTree::depth() const { return node_depth(root.get()); }

double tree_eval(const ModelTree& tree, const std::vector<double>& fvec) {
  const TreeNode* n = tree.root.get();
  while (!n->is_leaf) {
    n = predicate_holds(*n, fvec[n->feature]) ? n->right.get() : n->left.get();
  }
  return leaf_value(n->model, fvec);
}

double loss_exact(const ModelTree& tree, const ExactDataset& data, const ExprPtr& postE,
                  const BoolPtr& guard, const FeatureSet& feats) {
  double sse = 0;
  for (auto& row : data.rows) {
    double g = eval_bool(guard, row.state) ? 1.0 : 0.0;
    double pred = eval_expectation(postE, row.state);
    if (g != 0.0) pred += tree_eval(tree, feats.eval(row.state));
    double d = pred - row.v;
    sse += d * d;
  }
  return std::sqrt(sse);
}

namespace {

struct FitData {
  // Row-major feature matrix over the retained rows, plus residual targets.
  std::vector<std::vector<double>> x;  // x[row][feature]
  std::vector<double> y;
  std::vector<int> active;  // feature indices allowed in the fit
  int nfeatures = 0;
  LeafKind kind = LeafKind::Linear;
};

struct LeafFit {
  Eigen::VectorXd beta;  // over active features
  double intercept = 0;
  double sse = 0;
};

LeafFit fit_leaf(const FitData& d, const std::vector<int>& rows, double ridge, bool polish) {
  // Drop columns constant on these rows; the intercept absorbs them. This
  // keeps ridge from splitting weight across exactly collinear columns (the
  // guard feature is 1 on every retained row).
  std::vector<int> cols;
  for (size_t k = 0; k < d.active.size(); ++k) {
    int f = d.active[k];
    double lo = d.x[rows[0]][f], hi = lo;
    for (int r : rows) {
      lo = std::min(lo, d.x[r][f]);
      hi = std::max(hi, d.x[r][f]);
    }
    if (hi > lo) cols.push_back(static_cast<int>(k));
  }
  int n = static_cast<int>(rows.size());
  int m = static_cast<int>(cols.size());
  Eigen::MatrixXd X(n, m + 1);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) X(i, j) = d.x[rows[i]][d.active[cols[j]]];
    X(i, m) = 1.0;
    Y(i) = d.y[rows[i]];
  }
  Eigen::MatrixXd G = X.transpose() * X;
  Eigen::VectorXd b = X.transpose() * Y;
  Eigen::MatrixXd Gr = G + ridge * Eigen::MatrixXd::Identity(m + 1, m + 1);
  Eigen::VectorXd sol = Gr.ldlt().solve(b);
  double sse = (X * sol - Y).squaredNorm();
  if (polish) {
    // Exact least squares when the unpenalized system is well posed.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (lu.isInvertible()) {
      Eigen::VectorXd exact = lu.solve(b);
      double sse2 = (X * exact - Y).squaredNorm();
      if (sse2 <= sse) {
        sol = exact;
        sse = sse2;
      }
    }
  }
  LeafFit out;
  out.beta = Eigen::VectorXd::Zero(d.active.size());
  for (int j = 0; j < m; ++j) out.beta[cols[j]] = sol[j];
  out.intercept = sol[m];
  out.sse = sse;
  return out;
}

LeafModel to_leaf_model(const FitData& d, const LeafFit& fit) {
  LeafModel m;
  m.kind = d.kind;
  m.coef.assign(d.nfeatures, Rat(0));
  for (size_t k = 0; k < d.active.size(); ++k) {
    double b = fit.beta[k];
    if (b != 0.0) m.coef[d.active[k]] = rat_from_double(b);
  }
  m.intercept =
      d.kind == LeafKind::Linear ? rat_from_double(fit.intercept) : rat_from_double(std::exp(fit.intercept));
  return m;
}

std::shared_ptr<const TreeNode> fit_node(const FitData& d, std::vector<int> rows,
                                         const FitConfig& cfg, int depth) {
  LeafFit here = fit_leaf(d, rows, cfg.ridge, true);

  double best_sse = -1;
  int best_feature = -1;
  double best_cut = 0;
  std::vector<int> best_left, best_right;

  if (depth < cfg.max_depth && static_cast<int>(rows.size()) >= 2 * cfg.min_leaf &&
      here.sse > 1e-12) {
    for (size_t k = 0; k < d.active.size(); ++k) {
      int f = d.active[k];
      std::vector<double> vals;
      vals.reserve(rows.size());
      for (int r : rows) vals.push_back(d.x[r][f]);
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      if (vals.size() < 2) continue;
      // Midpoints of consecutive distinct values, thinned to a budget.
      std::vector<double> cuts;
      size_t ncuts = vals.size() - 1;
      size_t step = std::max<size_t>(1, ncuts / cfg.max_cuts_per_feature);
      for (size_t c = 0; c < ncuts; c += step) cuts.push_back(0.5 * (vals[c] + vals[c + 1]));
      for (double cut : cuts) {
        std::vector<int> left, right;
        for (int r : rows) (d.x[r][f] <= cut ? right : left).push_back(r);
        if (static_cast<int>(left.size()) < cfg.min_leaf ||
            static_cast<int>(right.size()) < cfg.min_leaf) {
          continue;
        }
        double sse = fit_leaf(d, left, cfg.ridge, false).sse +
                     fit_leaf(d, right, cfg.ridge, false).sse;
        if (best_feature < 0 || sse < best_sse) {
          best_sse = sse;
          best_feature = f;
          best_cut = cut;
          best_left = std::move(left);
          best_right = std::move(right);
        }
      }
    }
  }

  bool split = best_feature >= 0 && (here.sse - best_sse) / here.sse >= cfg.min_gain;
  auto node = std::make_shared<TreeNode>();
  if (!split) {
    node->is_leaf = true;
    node->model = to_leaf_model(d, here);
    return node;
  }
  node->is_leaf = false;
  node->feature = best_feature;
  node->op = CmpOp::Le;
  node->cut = rat_from_double(best_cut);
  node->left = fit_node(d, std::move(best_left), cfg, depth + 1);
  node->right = fit_node(d, std::move(best_right), cfg, depth + 1);
  return node;
}

}  // namespace

ModelTree fit_model_tree(const ExactDataset& data, const FeatureSet& feats, const ExprPtr& postE,
                         const BoolPtr& guard, const FitConfig& cfg,
                         std::vector<std::string>* warnings) {
  (void)guard;  // retained rows satisfy the guard; residuals already absorb it
  if (static_cast<int>(data.rows.size()) < cfg.min_leaf) {
    throw std::runtime_error("dataset smaller than min_leaf (" +
                             std::to_string(data.rows.size()) + " rows)");
  }
  FitData d;
  d.kind = feats.kind;
  d.nfeatures = feats.size();

  std::vector<std::vector<double>> raw(data.rows.size());
  std::vector<double> resid(data.rows.size());
  const long n = static_cast<long>(data.rows.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    raw[i] = feats.eval(data.rows[i].state);
    resid[i] = data.rows[i].v - eval_expectation(postE, data.rows[i].state);
  }

  if (feats.kind == LeafKind::Linear) {
    d.x = std::move(raw);
    d.y = std::move(resid);
    for (int f = 0; f < d.nfeatures; ++f) d.active.push_back(f);
  } else {
    // Log domain: drop rows with nonpositive residuals, exclude features that
    // are not strictly positive across the retained rows.
    constexpr double kEps = 1e-12;
    std::vector<int> rows;
    for (size_t i = 0; i < raw.size(); ++i) {
      if (resid[i] > kEps) rows.push_back(static_cast<int>(i));
    }
    if (rows.size() != raw.size() && warnings) {
      warnings->push_back("multiplicative fit dropped " +
                          std::to_string(raw.size() - rows.size()) +
                          " rows with nonpositive residuals");
    }
    if (static_cast<int>(rows.size()) < cfg.min_leaf) {
      throw std::runtime_error("degenerate dataset for multiplicative fit (too few positive residuals)");
    }
    for (int f = 0; f < d.nfeatures; ++f) {
      bool pos = true;
      for (int r : rows) {
        if (raw[r][f] <= kEps) {
          pos = false;
          break;
        }
      }
      if (pos) d.active.push_back(f);
    }
    d.x.resize(rows.size(), std::vector<double>(d.nfeatures, 0.0));
    d.y.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      for (int f : d.active) d.x[i][f] = std::log(raw[rows[i]][f]);
      d.y[i] = std::log(resid[rows[i]]);
    }
  }

  std::vector<int> all_rows(d.x.size());
  for (size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = static_cast<int>(i);

  ModelTree tree;
  tree.kind = feats.kind;
  tree.nfeatures = feats.size();
  FitData* dp = &d;
  // Cuts learned in log domain must be mapped back for multiplicative trees.
  auto root = fit_node(*dp, std::move(all_rows), cfg, 0);
  if (feats.kind == LeafKind::Multiplicative) {
    // Predicates were learned on log features; exponentiate the cut points.
    std::function<std::shared_ptr<const TreeNode>(const TreeNode&)> fix =
        [&](const TreeNode& nd) -> std::shared_ptr<const TreeNode> {
      auto copy = std::make_shared<TreeNode>(nd);
      if (!nd.is_leaf) {
        copy->cut = rat_from_double(std::exp(rat_to_double(nd.cut)));
        copy->left = fix(*nd.left);
        copy->right = fix(*nd.right);
      }
      return copy;
    };
    root = fix(*root);
  }
  tree.root = root;
  return tree;
}

namespace {

LeafModel round_leaf(const LeafModel& m, RoundingScheme scheme) {
  int digits = static_cast<int>(scheme);
  LeafModel out;
  out.kind = m.kind;
  out.coef.reserve(m.coef.size());
  if (m.kind == LeafKind::Linear) {
    for (auto& c : m.coef) out.coef.push_back(rat_round_digits(c, digits));
    out.intercept = rat_round_digits(m.intercept, digits);
  } else {
    for (auto& c : m.coef) out.coef.push_back(rat_round_digits(c, 0));
    out.intercept = rat_round_digits(m.intercept, digits);
  }
  return out;
}

std::shared_ptr<const TreeNode> round_node(const TreeNode& n, RoundingScheme scheme) {
  auto out = std::make_shared<TreeNode>(n);
  if (n.is_leaf) {
    out->model = round_leaf(n.model, scheme);
  } else {
    out->left = round_node(*n.left, scheme);
    out->right = round_node(*n.right, scheme);
  }
  return out;
}

}  // namespace

ModelTree round_tree(const ModelTree& tree, RoundingScheme scheme) {
  ModelTree out = tree;
  out.root = round_node(*tree.root, scheme);
  return out;
}

namespace {

ExprPtr leaf_to_expr(const LeafModel& m, const FeatureSet& feats) {
  if (m.kind == LeafKind::Linear) {
    ExprPtr sum = mk_const(m.intercept);
    for (size_t i = 0; i < m.coef.size(); ++i) {
      if (m.coef[i] == 0) continue;
      sum = mk_add(sum, mk_mul(mk_const(m.coef[i]), feats.items[i].expr));
    }
    return sum;
  }
  ExprPtr prod = mk_const(m.intercept);
  for (size_t i = 0; i < m.coef.size(); ++i) {
    if (m.coef[i] == 0) continue;
    if (denominator(m.coef[i]) != 1) {
      throw std::runtime_error("multiplicative leaf has a non-integer exponent; round the tree first");
    }
    int e = static_cast<int>(numerator(m.coef[i]).convert_to<long long>());
    prod = mk_mul(prod, mk_pow(feats.items[i].expr, e));
  }
  return prod;
}

ExprPtr node_to_expr(const TreeNode& n, const FeatureSet& feats) {
  if (n.is_leaf) return leaf_to_expr(n.model, feats);
  BoolPtr pred = mk_cmp(n.op, feats.items[n.feature].expr, mk_const(n.cut));
  ExprPtr right = node_to_expr(*n.right, feats);
  ExprPtr left = node_to_expr(*n.left, feats);
  return mk_add(mk_mul(mk_indicator(pred), right), mk_mul(mk_indicator(mk_not(pred)), left));
}

}  // namespace

ExprPtr tree_to_expectation(const ModelTree& tree, const FeatureSet& feats) {
  return node_to_expr(*tree.root, feats);
}

ExprPtr form_candidate(const ExprPtr& postE, const BoolPtr& guard, const ExprPtr& iprime) {
  return mk_add(postE, mk_mul(mk_indicator(guard), iprime));
}

namespace {

bool predicate_holds_rat(const TreeNode& n, const Rat& v) {
  switch (n.op) {
    case CmpOp::Lt: return v < n.cut;
    case CmpOp::Le: return v <= n.cut;
    case CmpOp::Eq: return v == n.cut;
    case CmpOp::Ne: return v != n.cut;
    case CmpOp::Gt: return v > n.cut;
    case CmpOp::Ge: return v >= n.cut;
  }
  return false;
}

std::shared_ptr<const TreeNode> pin_node(const TreeNode& n, int feature, const Rat& value) {
  if (n.is_leaf) {
    auto out = std::make_shared<TreeNode>(n);
    if (feature < static_cast<int>(n.model.coef.size()) && n.model.coef[feature] != 0) {
      if (n.model.kind == LeafKind::Linear) {
        out->model.intercept = n.model.intercept + n.model.coef[feature] * value;
      } else {
        // value^exponent folded into the leading constant; integer exponents
        // keep it exact, training-time exponents convert through doubles.
        Rat vexp;
        if (denominator(n.model.coef[feature]) == 1) {
          long long e = numerator(n.model.coef[feature]).convert_to<long long>();
          Rat r = 1;
          for (long long i = 0; i < std::llabs(e); ++i) r *= value;
          vexp = e < 0 ? Rat(1) / r : r;
        } else {
          vexp = rat_from_double(
              std::pow(rat_to_double(value), rat_to_double(n.model.coef[feature])));
        }
        out->model.intercept = n.model.intercept * vexp;
      }
      out->model.coef[feature] = Rat(0);
    }
    return out;
  }
  if (n.feature == feature) {
    return pin_node(predicate_holds_rat(n, value) ? *n.right : *n.left, feature, value);
  }
  auto out = std::make_shared<TreeNode>(n);
  out->left = pin_node(*n.left, feature, value);
  out->right = pin_node(*n.right, feature, value);
  return out;
}

}  // namespace

ModelTree pin_feature(const ModelTree& tree, int feature, const Rat& value) {
  ModelTree out = tree;
  out.root = pin_node(*tree.root, feature, value);
  return out;
}

namespace {

void print_node(std::ostream& os, const TreeNode& n, const FeatureSet& feats, int indent) {
  std::string pad(indent, ' ');
  if (n.is_leaf) {
    const LeafModel& m = n.model;
    os << pad;
    if (m.kind == LeafKind::Linear) {
      bool any = false;
      for (size_t i = 0; i < m.coef.size(); ++i) {
        if (m.coef[i] == 0) continue;
        if (any) os << " + ";
        os << rat_to_pretty_string(m.coef[i]) << "*(" << feats.items[i].name << ")";
        any = true;
      }
      if (m.intercept != 0 || !any) {
        if (any) os << " + ";
        os << rat_to_pretty_string(m.intercept);
      }
    } else {
      os << rat_to_pretty_string(m.intercept);
      for (size_t i = 0; i < m.coef.size(); ++i) {
        if (m.coef[i] == 0) continue;
        os << " * (" << feats.items[i].name << ")^" << rat_to_pretty_string(m.coef[i]);
      }
    }
    os << "\n";
    return;
  }
  static const char* ops[] = {"<", "<=", "==", "!=", ">", ">="};
  os << pad << "(" << feats.items[n.feature].name << " " << ops[static_cast<int>(n.op)] << " "
     << rat_to_pretty_string(n.cut) << ")?\n";
  os << pad << "no:\n";
  print_node(os, *n.left, feats, indent + 2);
  os << pad << "yes:\n";
  print_node(os, *n.right, feats, indent + 2);
}

}  // namespace

std::string tree_to_text(const ModelTree& tree, const FeatureSet& feats) {
  std::ostringstream os;
  print_node(os, *tree.root, feats, 0);
  return os.str();
}

}  // namespace exist
