#include "exist/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "exist/eval.hpp"

namespace exist {

std::string verdict_status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::VerifiedExact: return "VerifiedExact";
    case VerdictStatus::VerifiedBounded: return "VerifiedBounded";
    case VerdictStatus::Refuted: return "Refuted";
  }
  return "?";
}

std::vector<std::pair<Rat, Rat>> box_from_domain(const VarTable& vars,
                                                 const VerificationDomain& dom) {
  std::vector<std::pair<Rat, Rat>> box(vars.size());
  for (int v = 0; v < vars.size(); ++v) {
    switch (vars.types[v]) {
      case VarType::Bool: box[v] = {Rat(0), Rat(1)}; break;
      case VarType::Int: box[v] = {Rat(dom.n_lo), Rat(dom.n_hi)}; break;
      case VarType::Prob: box[v] = {rat_from_double(dom.p_lo), rat_from_double(dom.p_hi)}; break;
      case VarType::Real: box[v] = {rat_from_double(dom.x_lo), rat_from_double(dom.x_hi)}; break;
    }
  }
  return box;
}

int sign_definite_on_box(const Poly& p, const std::vector<std::pair<Rat, Rat>>& box, int depth) {
  auto [lo, hi] = p.range_on_box(box);
  if (lo > 0) return 1;
  if (hi < 0) return -1;
  if (depth <= 0) return 0;
  // Split the widest used interval.
  int pick = -1;
  Rat width = 0;
  for (int v : p.vars_used()) {
    Rat w = box[v].second - box[v].first;
    if (pick < 0 || w > width) {
      pick = v;
      width = w;
    }
  }
  if (pick < 0 || width == 0) return 0;
  Rat mid = (box[pick].first + box[pick].second) / 2;
  auto left = box;
  left[pick].second = mid;
  auto right = box;
  right[pick].first = mid;
  int a = sign_definite_on_box(p, left, depth - 1);
  if (a == 0) return 0;
  int b = sign_definite_on_box(p, right, depth - 1);
  return a == b ? a : 0;
}

namespace {

// Box constraints for the FM systems (exact rational endpoints).
void add_box_constraints(LinearSystem& sys, const std::vector<std::pair<Rat, Rat>>& box,
                         const std::vector<int>& vars_used) {
  for (int v : vars_used) {
    LinForm lo;  // box.lo - v <= 0
    lo.coef[v] = -1;
    lo.constant = box[v].first;
    sys.add(lo, LinRel::Le);
    LinForm hi;  // v - box.hi <= 0
    hi.coef[v] = 1;
    hi.constant = -box[v].second;
    sys.add(hi, LinRel::Le);
  }
}

struct RegionOutcome {
  bool proved = false;
  bool used_box = false;
};

// Tries to prove num/den <= 0 on every branch of a region.
RegionOutcome prove_region_nonpositive(const Region& region, int den_sign,
                                       const std::vector<std::pair<Rat, Rat>>& box) {
  RegionOutcome out;
  out.proved = true;
  Poly num = den_sign >= 0 ? region.fn.num : -region.fn.num;
  for (const LinearSystem& branch : region.branches) {
    Poly reduced = reduce_poly_by_implied_equalities(num, branch);
    if (reduced.is_zero()) continue;
    if (reduced.is_constant()) {
      if (reduced.constant_value() <= 0) continue;
      out.proved = false;
      return out;
    }
    if (!reduced.is_linear()) {
      out.proved = false;
      return out;
    }
    LinForm obj;
    for (auto& [e, c] : reduced.terms()) {
      int var = -1;
      for (size_t i = 0; i < e.size(); ++i) {
        if (e[i] > 0) var = static_cast<int>(i);
      }
      if (var < 0) {
        obj.constant = c;
      } else {
        obj.coef[var] = c;
      }
    }
    MaxResult mr = branch.maximize(obj);
    if (!mr.feasible) continue;
    if (mr.bounded && (mr.value < 0 || (mr.value == 0))) continue;
    // Retry over the region intersected with the domain box.
    LinearSystem bounded(branch.vars());
    for (auto& c : branch.constraints()) bounded.add(c);
    std::vector<int> used;
    for (auto& [v, c] : obj.coef) used.push_back(v);
    for (auto& c : branch.constraints()) {
      for (auto& [v, cc] : c.form.coef) used.push_back(v);
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    add_box_constraints(bounded, box, used);
    MaxResult mb = bounded.maximize(obj);
    if (!mb.feasible) continue;
    if (mb.bounded && mb.value <= 0) {
      out.used_box = true;
      continue;
    }
    out.proved = false;
    return out;
  }
  return out;
}

// Denominator side conditions; empty optional means some denominator's sign
// could not be settled and the exact path is off.
std::optional<std::vector<std::string>> discharge_denominators(
    const GuardedRationalForm& nf, const std::vector<std::pair<Rat, Rat>>& box,
    std::vector<int>* signs_by_region_index) {
  std::vector<std::string> conds;
  std::vector<Poly> dens = collect_denominators(nf);
  // Region-order pass to record per-region signs.
  signs_by_region_index->clear();
  for (auto& block : nf.blocks) {
    for (auto& region : block.regions) {
      const Poly& d = region.fn.den;
      if (d.is_constant()) {
        signs_by_region_index->push_back(d.constant_value() > 0 ? 1 : -1);
        continue;
      }
      int s = sign_definite_on_box(d, box);
      if (s == 0) return std::nullopt;
      signs_by_region_index->push_back(s);
    }
  }
  for (auto& d : dens) {
    int s = sign_definite_on_box(d, box);
    if (s == 0) return std::nullopt;
    conds.push_back("denominator " + d.to_string(*nf.vars) + (s > 0 ? " > 0" : " < 0") +
                    " on the verification domain");
  }
  return conds;
}

double safe_eval(const ExprPtr& e, const StateD& s) {
  try {
    double v = eval_expr(e, s);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  } catch (const EvalError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

struct SearchProblem {
  const ExprPtr& objective;
  const Program& prog;
  const VerificationDomain& dom;
};

StateD climb(const SearchProblem& sp, StateD s, double& value) {
  const VarTable& vars = *sp.prog.vars;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int sweep = 0; sweep < 20; ++sweep) {
    bool improved = false;
    for (int v = 0; v < vars.size(); ++v) {
      switch (vars.types[v]) {
        case VarType::Bool:
        case VarType::Int: {
          double lo = vars.types[v] == VarType::Bool ? 0 : static_cast<double>(sp.dom.n_lo);
          double hi = vars.types[v] == VarType::Bool ? 1 : static_cast<double>(sp.dom.n_hi);
          // Expanding unit steps in the better direction.
          for (double dir : {1.0, -1.0}) {
            double step = 1.0;
            while (true) {
              StateD t = s;
              t[v] = std::clamp(s[v] + dir * step, lo, hi);
              if (t[v] == s[v]) break;
              double tv = safe_eval(sp.objective, t);
              if (tv > value) {
                s = t;
                value = tv;
                improved = true;
                step *= 2;
              } else {
                break;
              }
            }
          }
          break;
        }
        case VarType::Prob:
        case VarType::Real: {
          double lo = vars.types[v] == VarType::Prob ? sp.dom.p_lo : sp.dom.x_lo;
          double hi = vars.types[v] == VarType::Prob ? sp.dom.p_hi : sp.dom.x_hi;
          double a = lo, b = hi;
          StateD t = s;
          // Golden-section refinement (maximization heuristic).
          double x1 = b - golden * (b - a);
          double x2 = a + golden * (b - a);
          t[v] = x1;
          double f1 = safe_eval(sp.objective, t);
          t[v] = x2;
          double f2 = safe_eval(sp.objective, t);
          for (int it = 0; it < 40 && b - a > 1e-10 * (hi - lo); ++it) {
            if (f1 < f2) {
              a = x1;
              x1 = x2;
              f1 = f2;
              x2 = a + golden * (b - a);
              t[v] = x2;
              f2 = safe_eval(sp.objective, t);
            } else {
              b = x2;
              x2 = x1;
              f2 = f1;
              x1 = b - golden * (b - a);
              t[v] = x1;
              f1 = safe_eval(sp.objective, t);
            }
          }
          double xm = f1 > f2 ? x1 : x2;
          t[v] = xm;
          double fm = safe_eval(sp.objective, t);
          if (fm > value) {
            s = t;
            value = fm;
            improved = true;
          }
          break;
        }
      }
    }
    if (!improved) break;
  }
  return s;
}

}  // namespace

std::vector<Counterexample> find_counterexamples(const ExprPtr& D, const Program& prog,
                                                 const VerificationDomain& dom, int k,
                                                 const RandomStream& rng,
                                                 const VerifierConfig& cfg) {
  SearchProblem sp{D, prog, dom};
  std::vector<StateD> starts = sample_states(prog, cfg.search_samples, dom, rng);
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(starts.size());
  for (size_t i = 0; i < starts.size(); ++i) {
    ranked.emplace_back(safe_eval(D, starts[i]), static_cast<int>(i));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) { return a.first > b.first; });
  int nclimb = std::min<int>(cfg.search_climbers, static_cast<int>(ranked.size()));

  std::vector<StateD> climbed(nclimb);
  std::vector<double> climbed_val(nclimb);
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < nclimb; ++c) {
    double val = ranked[c].first;
    StateD s = starts[ranked[c].second];
    if (std::isfinite(val)) s = climb(sp, std::move(s), val);
    climbed[c] = std::move(s);
    climbed_val[c] = val;
  }

  std::vector<Counterexample> out;
  for (int c = 0; c < nclimb; ++c) {
    if (!std::isfinite(climbed_val[c]) || climbed_val[c] <= cfg.tolerance) continue;
    bool dup = false;
    for (auto& prev : out) {
      if (prev.state == climbed[c]) dup = true;
    }
    if (!dup) out.push_back({climbed[c], climbed_val[c]});
  }
  std::stable_sort(out.begin(), out.end(), [](const Counterexample& a, const Counterexample& b) {
    if (a.violation != b.violation) return a.violation > b.violation;
    return a.state < b.state;
  });
  if (static_cast<int>(out.size()) > k) out.resize(k);
  return out;
}

namespace {

// Shared numeric fallback: search the objectives, refute on any positive
// violation, otherwise report the bounded maximum.
Verdict numeric_verdict(const std::vector<ExprPtr>& objectives, const Program& prog,
                        const VerificationDomain& dom, const VerifierConfig& cfg, uint64_t seed,
                        std::vector<std::string> side_conditions, const std::string& detail) {
  Verdict v;
  v.side_conditions = std::move(side_conditions);
  v.detail = detail;
  double bound = 0;
  std::vector<Counterexample> all;
  RandomStream rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (size_t i = 0; i < objectives.size(); ++i) {
    auto cexs = find_counterexamples(objectives[i], prog, dom, cfg.cex_count, rng.split(i), cfg);
    for (auto& c : cexs) {
      bound = std::max(bound, c.violation);
      all.push_back(std::move(c));
    }
  }
  if (!all.empty()) {
    std::stable_sort(all.begin(), all.end(), [](const Counterexample& a, const Counterexample& b) {
      if (a.violation != b.violation) return a.violation > b.violation;
      return a.state < b.state;
    });
    // Drop duplicate states across objectives.
    std::vector<Counterexample> dedup;
    for (auto& c : all) {
      bool seen = false;
      for (auto& p : dedup) {
        if (p.state == c.state) seen = true;
      }
      if (!seen) dedup.push_back(std::move(c));
    }
    if (static_cast<int>(dedup.size()) > cfg.cex_count) dedup.resize(cfg.cex_count);
    v.status = VerdictStatus::Refuted;
    v.counterexamples = std::move(dedup);
    return v;
  }
  v.status = VerdictStatus::VerifiedBounded;
  v.numeric_bound = bound;
  v.detail += v.detail.empty() ? "" : "; ";
  v.detail += "numeric search found no violation above the tolerance";
  return v;
}

}  // namespace

Verdict check_exact(const ExprPtr& inv, const Program& prog, const ExprPtr& postE,
                    const VerificationDomain& dom, const VerifierConfig& cfg, uint64_t seed) {
  ExprPtr D = mk_sub(inv, char_fn_apply(prog, postE, inv));
  ExprPtr negD = mk_sub(mk_const_int(0), D);
  auto box = box_from_domain(*prog.vars, dom);

  std::string exact_note;
  try {
    GuardedRationalForm nf = normalize(D, prog.vars, cfg.atom_cap);
    std::vector<int> region_signs;
    auto conds = discharge_denominators(nf, box, &region_signs);
    if (conds) {
      if (form_is_identically_zero(nf)) {
        Verdict v;
        v.status = VerdictStatus::VerifiedExact;
        v.side_conditions = *conds;
        v.detail = "difference vanishes on all " + std::to_string(nf.region_count()) +
                   " feasible regions (polynomial identity)";
        return v;
      }
      exact_note = "exact check found a region with nonzero difference";
    } else {
      exact_note = "a denominator's sign could not be settled on the domain";
    }
  } catch (const NormalizeError& e) {
    exact_note = std::string("normalization unavailable: ") + e.what();
  }
  return numeric_verdict({D, negD}, prog, dom, cfg, seed, {}, exact_note);
}

Verdict check_sub(const ExprPtr& inv, const Program& prog, const ExprPtr& preE,
                  const ExprPtr& postE, const VerificationDomain& dom, const VerifierConfig& cfg,
                  uint64_t seed) {
  ExprPtr d1 = mk_sub(preE, inv);
  ExprPtr d2 = mk_mul(mk_indicator(prog.guard), mk_sub(inv, wpe_loopfree(prog.body, inv)));
  auto box = box_from_domain(*prog.vars, dom);

  bool exact_ok = true;
  bool used_box = false;
  std::vector<std::string> conds;
  std::string note;
  int regions_checked = 0;
  for (const ExprPtr& d : {d1, d2}) {
    if (!exact_ok) break;
    try {
      GuardedRationalForm nf = normalize(d, prog.vars, cfg.atom_cap);
      std::vector<int> region_signs;
      auto dconds = discharge_denominators(nf, box, &region_signs);
      if (!dconds) {
        exact_ok = false;
        note = "a denominator's sign could not be settled on the domain";
        break;
      }
      for (auto& c : *dconds) conds.push_back(c);
      int ridx = 0;
      for (auto& block : nf.blocks) {
        for (auto& region : block.regions) {
          RegionOutcome oc = prove_region_nonpositive(region, region_signs[ridx], box);
          ++ridx;
          ++regions_checked;
          if (!oc.proved) {
            exact_ok = false;
            note = "a region's sign could not be proved exactly";
            break;
          }
          used_box = used_box || oc.used_box;
        }
        if (!exact_ok) break;
      }
    } catch (const NormalizeError& e) {
      exact_ok = false;
      note = std::string("normalization unavailable: ") + e.what();
    }
  }

  if (exact_ok) {
    Verdict v;
    v.status = VerdictStatus::VerifiedExact;
    std::sort(conds.begin(), conds.end());
    conds.erase(std::unique(conds.begin(), conds.end()), conds.end());
    v.side_conditions = std::move(conds);
    if (used_box) {
      v.side_conditions.push_back("nonpositivity established over the verification domain box");
    }
    v.detail = "both objectives nonpositive on all " + std::to_string(regions_checked) +
               " feasible regions";
    return v;
  }
  return numeric_verdict({d1, d2}, prog, dom, cfg, seed, {}, note);
}

bool expectations_semantically_equal(const ExprPtr& a, const ExprPtr& b, const VarTablePtr& vars,
                                     int atom_cap) {
  try {
    GuardedRationalForm nf = normalize(mk_sub(a, b), vars, atom_cap);
    return form_is_identically_zero(nf);
  } catch (const NormalizeError&) {
    return false;
  }
}

}  // namespace exist
