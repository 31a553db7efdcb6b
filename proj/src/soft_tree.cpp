#include "exist/soft_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "exist/eval.hpp"
#include "exist/rng.hpp"

namespace exist {

namespace {

constexpr double kLogClamp = 1e-12;

double to_internal(double raw, LeafKind kind) {
  return kind == LeafKind::Multiplicative ? std::log(std::max(raw, kLogClamp)) : raw;
}

double sigmoid(double z) {
  if (z >= 0) {
    double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> SoftTree::pack() const {
  std::vector<double> out = cuts;
  for (auto& row : leaf_coef) out.insert(out.end(), row.begin(), row.end());
  return out;
}

void SoftTree::unpack(const std::vector<double>& params) {
  int d = depth();
  for (int j = 0; j < d; ++j) cuts[j] = params[j];
  int w = nfeatures + 1;
  for (int l = 0; l < leaves(); ++l) {
    for (int k = 0; k < w; ++k) leaf_coef[l][k] = params[d + l * w + k];
  }
}

SubFitData prepare_sub_data(const SubDataset& data, const FeatureSet& feats, const ExprPtr& preE,
                            const ExprPtr& postE, const BoolPtr& guard) {
  SubFitData out;
  out.kind = feats.kind;
  out.nfeat = feats.size();
  out.rows = static_cast<int>(data.rows.size());
  int F = out.nfeat;
  out.pre.resize(out.rows);
  out.post.resize(out.rows);
  out.guard.resize(out.rows);
  out.x.resize(static_cast<size_t>(out.rows) * F);
  out.raw_min.assign(F, std::numeric_limits<double>::infinity());
  out.raw_max.assign(F, -std::numeric_limits<double>::infinity());
  out.active.assign(F, true);
  out.succ_offset.assign(out.rows + 1, 0);
  out.agg_guard.resize(out.rows);
  out.agg_post.resize(out.rows);
  out.agg_gx.assign(static_cast<size_t>(out.rows) * F, 0.0);

  long total_succ = 0;
  for (auto& row : data.rows) total_succ += static_cast<long>(row.succs.size());
  out.succ_post.resize(total_succ);
  out.succ_guard.resize(total_succ);
  out.succ_x.resize(total_succ * F);

  long off = 0;
  for (int i = 0; i < out.rows; ++i) {
    const SubRow& row = data.rows[i];
    out.pre[i] = eval_expectation(preE, row.state);
    out.post[i] = eval_expectation(postE, row.state);
    out.guard[i] = row.guard_true ? 1.0 : 0.0;
    std::vector<double> fv = feats.eval(row.state);
    for (int k = 0; k < F; ++k) {
      out.raw_min[k] = std::min(out.raw_min[k], fv[k]);
      out.raw_max[k] = std::max(out.raw_max[k], fv[k]);
      if (fv[k] <= kLogClamp) out.active[k] = false;
      out.x[static_cast<size_t>(i) * F + k] = to_internal(fv[k], feats.kind);
    }
    out.succ_offset[i] = off;
    double g_sum = 0, p_sum = 0;
    for (auto& s : row.succs) {
      double g = eval_bool(guard, s) ? 1.0 : 0.0;
      double pv = eval_expectation(postE, s);
      out.succ_guard[off] = g;
      out.succ_post[off] = pv;
      std::vector<double> sf = feats.eval(s);
      for (int k = 0; k < F; ++k) {
        out.raw_min[k] = std::min(out.raw_min[k], sf[k]);
        out.raw_max[k] = std::max(out.raw_max[k], sf[k]);
        if (sf[k] <= kLogClamp) out.active[k] = false;
        out.succ_x[off * F + k] = to_internal(sf[k], feats.kind);
      }
      g_sum += g;
      p_sum += pv;
      for (int k = 0; k < F; ++k) {
        out.agg_gx[static_cast<size_t>(i) * F + k] += g * out.succ_x[off * F + k];
      }
      ++off;
    }
    size_t ns = row.succs.size();
    if (ns > 0) {
      out.agg_guard[i] = g_sum / ns;
      out.agg_post[i] = p_sum / ns;
      for (int k = 0; k < F; ++k) out.agg_gx[static_cast<size_t>(i) * F + k] /= ns;
    } else {
      out.agg_guard[i] = 0;
      out.agg_post[i] = 0;
    }
  }
  out.succ_offset[out.rows] = off;
  // Linear kind keeps every feature.
  if (feats.kind == LeafKind::Linear) out.active.assign(F, true);
  out.feat_scale.assign(F, 1.0);
  for (size_t i = 0; i < out.x.size(); ++i) {
    int k = static_cast<int>(i % F);
    out.feat_scale[k] = std::max(out.feat_scale[k], std::abs(out.x[i]));
  }
  for (size_t i = 0; i < out.succ_x.size(); ++i) {
    int k = static_cast<int>(i % F);
    out.feat_scale[k] = std::max(out.feat_scale[k], std::abs(out.succ_x[i]));
  }
  return out;
}

namespace {

// Per-point evaluation state shared between forward and backward passes.
struct PointEval {
  double value = 0;
  std::vector<double> t;       // sigmoid truth per level
  std::vector<double> w;       // weight per leaf
  std::vector<double> leaf_v;  // leaf value per leaf
};

void eval_point(const SoftTree& st, const double* f, PointEval& pe) {
  int d = st.depth();
  int L = st.leaves();
  int F = st.nfeatures;
  pe.t.resize(d);
  pe.w.assign(L, 1.0);
  pe.leaf_v.resize(L);
  for (int j = 0; j < d; ++j) {
    pe.t[j] = sigmoid((st.cuts[j] - f[st.split_feats[j]]) / st.tau);
  }
  for (int l = 0; l < L; ++l) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) w *= (l >> j) & 1 ? pe.t[j] : 1.0 - pe.t[j];
    pe.w[l] = w;
  }
  pe.value = 0;
  for (int l = 0; l < L; ++l) {
    const std::vector<double>& row = st.leaf_coef[l];
    double acc = row[F];
    for (int k = 0; k < F; ++k) acc += row[k] * f[k];
    double v = st.kind == LeafKind::Multiplicative ? std::exp(acc) : acc;
    pe.leaf_v[l] = v;
    pe.value += pe.w[l] * v;
  }
}

// d(point value)/d(params), accumulated into g with weight `scale`.
void accumulate_point_grad(const SoftTree& st, const double* f, const PointEval& pe, double scale,
                           double* g) {
  int d = st.depth();
  int L = st.leaves();
  int F = st.nfeatures;
  for (int j = 0; j < d; ++j) {
    double dv = 0;
    for (int l = 0; l < L; ++l) {
      double dw = (l >> j) & 1 ? pe.w[l] * (1.0 - pe.t[j]) : -pe.w[l] * pe.t[j];
      dv += dw / st.tau * pe.leaf_v[l];
    }
    g[j] += scale * dv;
  }
  int w = F + 1;
  for (int l = 0; l < L; ++l) {
    double common = st.kind == LeafKind::Multiplicative ? pe.w[l] * pe.leaf_v[l] : pe.w[l];
    double* row = g + d + l * w;
    for (int k = 0; k < F; ++k) row[k] += scale * common * f[k];
    row[F] += scale * common;
  }
}

bool fast_path(const SoftTree& st) { return st.kind == LeafKind::Linear && st.depth() == 0; }

// Single-leaf linear trees admit sufficient statistics: the successor average
// of T is T applied to the successor aggregates.
double loss_and_grad_fast(const SoftTree& st, const SubFitData& d, std::vector<double>* grad) {
  int F = d.nfeat;
  const std::vector<double>& row = st.leaf_coef[0];
  if (grad) grad->assign(st.param_count(), 0.0);
  double loss = 0;
  for (int i = 0; i < d.rows; ++i) {
    const double* xi = d.x.data() + static_cast<size_t>(i) * F;
    double ti = row[F];
    for (int k = 0; k < F; ++k) ti += row[k] * xi[k];
    double e1 = d.pre[i] - d.post[i] - d.guard[i] * ti;
    if (e1 > 0) {
      loss += e1;
      if (grad && d.guard[i] != 0) {
        for (int k = 0; k < F; ++k) (*grad)[k] -= d.guard[i] * xi[k];
        (*grad)[F] -= d.guard[i];
      }
    }
    if (d.guard[i] != 0) {
      const double* gx = d.agg_gx.data() + static_cast<size_t>(i) * F;
      double avg_t = row[F] * d.agg_guard[i];
      for (int k = 0; k < F; ++k) avg_t += row[k] * gx[k];
      double e2 = d.post[i] + ti - d.agg_post[i] - avg_t;
      if (e2 > 0) {
        loss += e2;
        if (grad) {
          for (int k = 0; k < F; ++k) (*grad)[k] += xi[k] - gx[k];
          (*grad)[F] += 1.0 - d.agg_guard[i];
        }
      }
    }
  }
  return loss;
}

}  // namespace

double soft_forward(const SoftTree& st, const std::vector<double>& fvec) {
  std::vector<double> internal(fvec.size());
  for (size_t k = 0; k < fvec.size(); ++k) internal[k] = to_internal(fvec[k], st.kind);
  PointEval pe;
  eval_point(st, internal.data(), pe);
  return pe.value;
}

double sub_loss_and_grad_reference(const SoftTree& st, const SubFitData& d,
                                   std::vector<double>* grad) {
  if (grad) grad->assign(st.param_count(), 0.0);
  int F = d.nfeat;
  PointEval pe, ps;
  double loss = 0;
  std::vector<double> succ_grad(grad ? st.param_count() : 0);
  for (int i = 0; i < d.rows; ++i) {
    const double* xi = d.x.data() + static_cast<size_t>(i) * F;
    eval_point(st, xi, pe);
    double ti = pe.value;
    double e1 = d.pre[i] - d.post[i] - d.guard[i] * ti;
    if (e1 > 0) {
      loss += e1;
      if (grad && d.guard[i] != 0) accumulate_point_grad(st, xi, pe, -d.guard[i], grad->data());
    }
    if (d.guard[i] == 0) continue;
    long lo = d.succ_offset[i], hi = d.succ_offset[i + 1];
    if (hi == lo) continue;
    double avg = 0;
    if (grad) std::fill(succ_grad.begin(), succ_grad.end(), 0.0);
    for (long s = lo; s < hi; ++s) {
      const double* xs = d.succ_x.data() + s * F;
      double term = d.succ_post[s];
      if (d.succ_guard[s] != 0) {
        eval_point(st, xs, ps);
        term += d.succ_guard[s] * ps.value;
        if (grad) accumulate_point_grad(st, xs, ps, d.succ_guard[s], succ_grad.data());
      }
      avg += term;
    }
    double inv = 1.0 / static_cast<double>(hi - lo);
    avg *= inv;
    double e2 = d.post[i] + ti - avg;
    if (e2 > 0) {
      loss += e2;
      if (grad) {
        accumulate_point_grad(st, xi, pe, 1.0, grad->data());
        for (int j = 0; j < st.param_count(); ++j) (*grad)[j] -= inv * succ_grad[j];
      }
    }
  }
  return loss;
}

double sub_loss_and_grad(const SoftTree& st, const SubFitData& d, std::vector<double>* grad) {
  if (fast_path(st)) return loss_and_grad_fast(st, d, grad);
  int F = d.nfeat;
  int P = st.param_count();
  std::vector<double> row_loss(d.rows, 0.0);
  std::vector<double> row_grad;
  if (grad) row_grad.assign(static_cast<size_t>(d.rows) * P, 0.0);

#pragma omp parallel
  {
    PointEval pe, ps;
    std::vector<double> succ_grad(grad ? P : 0);
#pragma omp for schedule(dynamic, 8)
    for (int i = 0; i < d.rows; ++i) {
      double* gi = grad ? row_grad.data() + static_cast<size_t>(i) * P : nullptr;
      const double* xi = d.x.data() + static_cast<size_t>(i) * F;
      eval_point(st, xi, pe);
      double ti = pe.value;
      double e1 = d.pre[i] - d.post[i] - d.guard[i] * ti;
      if (e1 > 0) {
        row_loss[i] += e1;
        if (gi && d.guard[i] != 0) accumulate_point_grad(st, xi, pe, -d.guard[i], gi);
      }
      if (d.guard[i] == 0) continue;
      long lo = d.succ_offset[i], hi = d.succ_offset[i + 1];
      if (hi == lo) continue;
      double avg = 0;
      if (gi) std::fill(succ_grad.begin(), succ_grad.end(), 0.0);
      for (long s = lo; s < hi; ++s) {
        const double* xs = d.succ_x.data() + s * F;
        double term = d.succ_post[s];
        if (d.succ_guard[s] != 0) {
          eval_point(st, xs, ps);
          term += d.succ_guard[s] * ps.value;
          if (gi) accumulate_point_grad(st, xs, ps, d.succ_guard[s], succ_grad.data());
        }
        avg += term;
      }
      double inv = 1.0 / static_cast<double>(hi - lo);
      avg *= inv;
      double e2 = d.post[i] + ti - avg;
      if (e2 > 0) {
        row_loss[i] += e2;
        if (gi) {
          accumulate_point_grad(st, xi, pe, 1.0, gi);
          for (int j = 0; j < P; ++j) gi[j] -= inv * succ_grad[j];
        }
      }
    }
  }
  double loss = 0;
  for (int i = 0; i < d.rows; ++i) loss += row_loss[i];
  if (grad) {
    grad->assign(P, 0.0);
    for (int i = 0; i < d.rows; ++i) {
      const double* gi = row_grad.data() + static_cast<size_t>(i) * P;
      for (int j = 0; j < P; ++j) (*grad)[j] += gi[j];
    }
  }
  return loss;
}

double sub_loss(const SoftTree& st, const SubFitData& data) {
  return sub_loss_and_grad(st, data, nullptr);
}

double sub_loss(const SoftTree& st, const SubDataset& data, const ExprPtr& preE,
                const ExprPtr& postE, const BoolPtr& guard, const FeatureSet& feats) {
  SubFitData d = prepare_sub_data(data, feats, preE, postE, guard);
  return sub_loss_and_grad(st, d, nullptr);
}

std::vector<double> grad_sub_loss(const SoftTree& st, const SubFitData& data) {
  std::vector<double> g;
  sub_loss_and_grad(st, data, &g);
  return g;
}

namespace {

double column_quantile(const SubFitData& d, int feat, double q) {
  std::vector<double> vals(d.rows);
  for (int i = 0; i < d.rows; ++i) vals[i] = d.x[static_cast<size_t>(i) * d.nfeat + feat];
  std::sort(vals.begin(), vals.end());
  if (vals.empty()) return 0;
  size_t idx = std::min(vals.size() - 1, static_cast<size_t>(q * vals.size()));
  return vals[idx];
}

}  // namespace

SoftTree make_soft_tree(const FeatureSet& feats, const SubFitData& data, int d,
                        const TrainHyper& hyper) {
  SoftTree st;
  st.kind = feats.kind;
  st.nfeatures = feats.size();
  st.tau = hyper.tau_start;

  if (d > 0) {
    // Guard-related features first: the guard indicator itself is feature 0
    // by construction, but splitting on it is useless (retained rows are
    // mixed); prefer variables that appear in guard atoms, then rank by
    // correlation between the feature and the one-step drop of postE.
    std::vector<std::pair<double, int>> scored;
    for (int k = 0; k < feats.size(); ++k) {
      if (!data.active.empty() && !data.active[k]) continue;
      if (feats.items[k].expr->kind == Expr::Kind::Indicator) continue;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int n = 0;
      for (int i = 0; i < data.rows; ++i) {
        if (data.guard[i] == 0) continue;
        double fx = data.x[static_cast<size_t>(i) * data.nfeat + k];
        double fy = data.agg_post[i] - data.post[i];
        sx += fx;
        sy += fy;
        sxx += fx * fx;
        sxy += fx * fy;
        ++n;
      }
      if (n < 2) continue;
      double varx = sxx - sx * sx / n;
      double cov = std::abs(sxy - sx * sy / n);
      double score = varx > 1e-12 ? cov / std::sqrt(varx) : 0.0;
      scored.emplace_back(-score, k);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](auto& a, auto& b) { return a.first < b.first; });
    for (int j = 0; j < d && j < static_cast<int>(scored.size()); ++j) {
      st.split_feats.push_back(scored[j].second);
    }
  }

  for (int f : st.split_feats) st.cuts.push_back(column_quantile(data, f, 0.5));
  st.leaf_coef.assign(st.leaves(), std::vector<double>(st.nfeatures + 1, 0.0));

  if (hyper.restart_index > 0) {
    RandomStream rng(hyper.seed ^ (0x517cc1b727220a95ULL * (hyper.restart_index + 1)));
    for (auto& row : st.leaf_coef) {
      for (auto& c : row) c = rng.uniform_real(-0.5, 0.5);
    }
    for (size_t j = 0; j < st.cuts.size(); ++j) {
      double q1 = column_quantile(data, st.split_feats[j], 0.25);
      double q3 = column_quantile(data, st.split_feats[j], 0.75);
      st.cuts[j] += rng.uniform_real(-0.5, 0.5) * (q3 - q1);
    }
  }
  // Multiplicative trees never move coefficients of masked features.
  return st;
}

SoftTree train(SoftTree st, const SubFitData& data, const TrainHyper& hyper,
               std::vector<std::pair<int, double>>* curve) {
  if (hyper.epochs <= 0) return st;
  const int P = st.param_count();
  const int F = data.nfeat;
  const int d = st.depth();
  std::vector<double> params = st.pack();
  std::vector<double> grad(P);

  auto is_coef_slot = [&](int j) {
    if (j < d) return false;
    return (j - d) % (F + 1) != F;  // everything but the intercept column
  };

  auto mask_inactive = [&](std::vector<double>* g) {
    if (data.kind != LeafKind::Multiplicative) return;
    for (int l = 0; l < st.leaves(); ++l) {
      for (int k = 0; k < F; ++k) {
        if (!data.active[k]) (*g)[d + l * (F + 1) + k] = 0.0;
      }
    }
  };

  // Per-parameter preconditioner: gradient descent in feature-standardized
  // coordinates. A coefficient on a large-range feature moves less.
  std::vector<double> precond(P, 1.0);
  for (int j = 0; j < P; ++j) {
    if (!is_coef_slot(j)) continue;
    int k = (j - d) % (F + 1);
    precond[j] = 1.0 / (data.feat_scale[k] * data.feat_scale[k]);
  }

  // Objective = sub_loss + decay * sum (scaled coef)^2 (intercepts and cuts
  // free); the penalty lives in standardized units too.
  auto objective = [&](const std::vector<double>& theta, std::vector<double>* g) {
    st.unpack(theta);
    double loss = sub_loss_and_grad(st, data, g);
    double pen = 0;
    for (int j = 0; j < P; ++j) {
      if (!is_coef_slot(j)) continue;
      double w = 1.0 / precond[j];  // scale^2
      pen += w * theta[j] * theta[j];
      if (g) (*g)[j] += 2 * hyper.decay * w * theta[j];
    }
    if (g) mask_inactive(g);
    return std::pair<double, double>(loss, loss + hyper.decay * pen);
  };

  std::vector<double> best = params;
  double best_sub = std::numeric_limits<double>::infinity();
  double best_obj = std::numeric_limits<double>::infinity();
  int since_best = 0;

  double ratio = hyper.tau_end / hyper.tau_start;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    double frac = hyper.epochs > 1 ? static_cast<double>(epoch) / (hyper.epochs - 1) : 1.0;
    st.tau = hyper.tau_start * std::pow(ratio, frac);
    auto [sub, obj] = objective(params, &grad);
    if (!std::isfinite(obj)) {
      throw std::runtime_error("non-finite training loss; reduce the step size");
    }
    if (curve && (epoch % 50 == 0 || epoch == hyper.epochs - 1)) curve->emplace_back(epoch, sub);
    if (sub < best_sub - 1e-12 || (sub < best_sub + 1e-12 && obj < best_obj - 1e-12)) {
      best_sub = std::min(best_sub, sub);
      best_obj = obj;
      best = params;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (obj == 0.0 || since_best > hyper.patience) break;

    double g2 = 0;
    for (int j = 0; j < P; ++j) g2 += precond[j] * grad[j] * grad[j];
    if (g2 == 0) break;  // flat neighborhood

    // Polyak step toward zero loss in the preconditioned metric, halved until
    // the objective decreases.
    double step = hyper.step * obj / g2;
    std::vector<double> proposal(P);
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      for (int j = 0; j < P; ++j) proposal[j] = params[j] - step * precond[j] * grad[j];
      auto [sub2, obj2] = objective(proposal, nullptr);
      (void)sub2;
      if (std::isfinite(obj2) && obj2 < obj) {
        params = proposal;
        accepted = true;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;  // no descent at any scale along -grad
  }
  st.unpack(best);
  st.tau = hyper.tau_end;
  return st;
}

double min_hinge_margin(const SoftTree& st, const SubFitData& d) {
  double margin = std::numeric_limits<double>::infinity();
  int F = d.nfeat;
  PointEval pe, ps;
  SoftTree copy = st;
  for (int i = 0; i < d.rows; ++i) {
    const double* xi = d.x.data() + static_cast<size_t>(i) * F;
    eval_point(copy, xi, pe);
    double e1 = d.pre[i] - d.post[i] - d.guard[i] * pe.value;
    margin = std::min(margin, std::abs(e1));
    if (d.guard[i] == 0) continue;
    long lo = d.succ_offset[i], hi = d.succ_offset[i + 1];
    if (hi == lo) continue;
    double avg = 0;
    for (long s = lo; s < hi; ++s) {
      const double* xs = d.succ_x.data() + s * F;
      double term = d.succ_post[s];
      if (d.succ_guard[s] != 0) {
        eval_point(copy, xs, ps);
        term += d.succ_guard[s] * ps.value;
      }
      avg += term;
    }
    avg /= static_cast<double>(hi - lo);
    margin = std::min(margin, std::abs(d.post[i] + pe.value - avg));
  }
  return margin;
}

ModelTree harden(const SoftTree& st, const FeatureSet& feats, const SubFitData& data) {
  ModelTree out;
  out.kind = st.kind;
  out.nfeatures = st.nfeatures;
  int F = st.nfeatures;

  auto leaf_node = [&](int l) {
    auto node = std::make_shared<TreeNode>();
    node->is_leaf = true;
    node->model.kind = st.kind;
    node->model.coef.reserve(F);
    const std::vector<double>& row = st.leaf_coef[l];
    for (int k = 0; k < F; ++k) node->model.coef.push_back(rat_from_double(row[k]));
    node->model.intercept = st.kind == LeafKind::Multiplicative
                                ? rat_from_double(std::exp(row[F]))
                                : rat_from_double(row[F]);
    return node;
  };

  std::function<std::shared_ptr<const TreeNode>(int, int)> build =
      [&](int level, int leaf_bits) -> std::shared_ptr<const TreeNode> {
    if (level == st.depth()) return leaf_node(leaf_bits);
    int f = st.split_feats[level];
    double cut = st.cuts[level];
    if (st.kind == LeafKind::Multiplicative) cut = std::exp(cut);
    auto left = build(level + 1, leaf_bits);                   // predicate false
    auto right = build(level + 1, leaf_bits | (1 << level));   // predicate true
    // Prune sides unreachable under the observed feature range.
    if (!data.raw_min.empty()) {
      if (data.raw_max[f] <= cut) return right;  // always f <= cut
      if (data.raw_min[f] > cut) return left;
    }
    auto node = std::make_shared<TreeNode>();
    node->is_leaf = false;
    node->feature = f;
    node->op = CmpOp::Le;
    node->cut = rat_from_double(cut);
    if (feats.items[f].type == ExprType::Bool && cut >= 0 && cut < 1) {
      // f <= c with c in [0,1) on a 0/1 feature means f = 0; flip to f == 1.
      node->op = CmpOp::Eq;
      node->cut = Rat(1);
      node->left = right;
      node->right = left;
    } else {
      node->left = left;
      node->right = right;
    }
    return node;
  };

  out.root = build(0, 0);
  return out;
}

}  // namespace exist
