#include "exist/cegis.hpp"

#include <chrono>
#include <fstream>
#include <future>
#include <set>

#include "json.hpp"

#include "exist/eval.hpp"

namespace exist {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const char* scheme_name(RoundingScheme s) {
  switch (s) {
    case RoundingScheme::Int: return "int";
    case RoundingScheme::OneDigit: return "1-digit";
    case RoundingScheme::TwoDigit: return "2-digit";
  }
  return "?";
}

struct Candidate {
  ModelTree tree;
  const FeatureSet* feats;
  RoundingScheme scheme;
  int splits = 0;
  ExprPtr iprime;
  ExprPtr invariant;
};

// Rounded candidates from a fitted tree, guard feature pinned to 1 (the
// candidate only sees the tree under [G]).
void push_candidates(std::vector<Candidate>* out, const ModelTree& fitted, const FeatureSet& feats,
                     const ExprPtr& postE, const BoolPtr& guard) {
  ModelTree pinned = pin_feature(fitted, 0, Rat(1));
  for (RoundingScheme s : {RoundingScheme::Int, RoundingScheme::OneDigit, RoundingScheme::TwoDigit}) {
    Candidate c;
    c.tree = round_tree(pinned, s);
    c.feats = &feats;
    c.scheme = s;
    c.splits = c.tree.node_count() / 2;
    c.iprime = tree_to_expectation(c.tree, feats);
    c.invariant = form_candidate(postE, guard, c.iprime);
    out->push_back(std::move(c));
  }
}

// Ordering: integer scheme first, then 1-digit, 2-digit; within a scheme
// linear before multiplicative; simpler trees first.
void order_candidates(std::vector<Candidate>* cands) {
  std::stable_sort(cands->begin(), cands->end(), [](const Candidate& a, const Candidate& b) {
    if (a.scheme != b.scheme) return static_cast<int>(a.scheme) < static_cast<int>(b.scheme);
    if (a.feats->kind != b.feats->kind) return a.feats->kind == LeafKind::Linear;
    return a.splits < b.splits;
  });
}

struct LoopShared {
  const Program& prog;
  const RunConfig& cfg;
  RunReport& report;
  Clock::time_point t0;
  RandomStream rng;

  LoopShared(const Program& p, const RunConfig& c, RunReport& r)
      : prog(p), cfg(c), report(r), t0(Clock::now()), rng(c.seed) {}

  bool timed_out() const { return seconds_since(t0) > cfg.timeout_sec; }
};

// Verifies candidates in order; fills records; returns the verified index or
// -1. Counterexample states from refuted candidates accumulate into `cex`.
template <class CheckFn>
int verify_candidates(LoopShared& ls, const std::vector<Candidate>& cands, CheckFn check,
                      IterationRecord* rec, std::vector<StateD>* cex) {
  std::set<std::string> seen;
  for (size_t ci = 0; ci < cands.size(); ++ci) {
    const Candidate& c = cands[ci];
    CandidateRecord cr;
    cr.kind = c.feats->kind == LeafKind::Linear ? "linear" : "multiplicative";
    cr.scheme = scheme_name(c.scheme);
    cr.splits = c.splits;
    cr.iprime = to_string(c.iprime);
    cr.invariant = to_string(c.invariant);
    cr.tree = tree_to_text(c.tree, *c.feats);
    if (!seen.insert(cr.invariant).second) continue;  // duplicate after rounding
    if (ls.timed_out()) {
      cr.status = "skipped (timeout)";
      rec->candidates.push_back(std::move(cr));
      break;
    }
    Verdict v = check(c.invariant);
    cr.status = verdict_status_name(v.status);
    cr.side_conditions = v.side_conditions;
    cr.detail = v.detail;
    if (!v.counterexamples.empty()) cr.top_violation = v.counterexamples[0].violation;
    bool ok = v.status != VerdictStatus::Refuted;
    if (!ok) {
      for (auto& cx : v.counterexamples) {
        cr.counterexamples.push_back(describe_state(cx.state, *ls.prog.vars) + " violation " +
                                     std::to_string(cx.violation));
        cex->push_back(cx.state);
      }
    }
    rec->candidates.push_back(std::move(cr));
    if (ok) {
      ls.report.verified = true;
      ls.report.invariant = to_string(c.invariant);
      ls.report.verdict = std::move(v);
      return static_cast<int>(ci);
    }
  }
  return -1;
}

}  // namespace

std::vector<StateD> augment_states(const std::vector<StateD>& states,
                                   const std::vector<StateD>& cex, int copies,
                                   const std::vector<StateD>& fresh) {
  std::vector<StateD> out = states;
  out.reserve(states.size() + cex.size() * copies + fresh.size());
  for (auto& c : cex) {
    for (int i = 0; i < copies; ++i) out.push_back(c);
  }
  out.insert(out.end(), fresh.begin(), fresh.end());
  return out;
}

RunReport run_exact(const Program& prog, const ExprPtr& postE, const RunConfig& cfg) {
  RunReport report;
  report.program_name = prog.name;
  report.mode = "exact";
  report.post = to_string(postE);
  report.config = cfg;
  LoopShared ls(prog, cfg, report);

  auto [fl, fm] = get_features(prog, postE, cfg.feature_cap);
  std::vector<StateD> states = sample_states(prog, cfg.nstates, cfg.domain, ls.rng.split(0));
  ExactDataset data;

  for (int iter = 0; !ls.timed_out(); ++iter) {
    IterationRecord rec;
    rec.index = iter;

    auto ts = Clock::now();
    ExactDataset fresh_rows = sample_traces_exact(prog, postE, states, cfg.nruns, cfg.max_iters,
                                                  ls.rng.split(2 * iter + 1));
    data.rows.insert(data.rows.end(), fresh_rows.rows.begin(), fresh_rows.rows.end());
    rec.dataset_rows = static_cast<long>(data.rows.size());
    if (!cfg.dump_path.empty()) {
      std::ofstream(cfg.dump_path) << dataset_to_text(data, *prog.vars);
    }
    report.time_sampling += seconds_since(ts);

    auto tl = Clock::now();
    std::vector<Candidate> cands;
    auto fit_linear = std::async(std::launch::async, [&] {
      return fit_model_tree(data, fl, postE, prog.guard, cfg.fit, nullptr);
    });
    ModelTree tm;
    bool have_mult = false;
    std::vector<std::string> mult_warnings;
    try {
      tm = fit_model_tree(data, fm, postE, prog.guard, cfg.fit, &mult_warnings);
      have_mult = true;
    } catch (const std::exception& e) {
      mult_warnings.push_back(std::string("multiplicative fit skipped: ") + e.what());
    }
    ModelTree tlin = fit_linear.get();
    rec.warnings = std::move(mult_warnings);
    rec.loss_linear = loss_exact(tlin, data, postE, prog.guard, fl);
    push_candidates(&cands, tlin, fl, postE, prog.guard);
    if (have_mult) {
      rec.loss_mult = loss_exact(tm, data, postE, prog.guard, fm);
      push_candidates(&cands, tm, fm, postE, prog.guard);
    }
    order_candidates(&cands);
    report.time_learning += seconds_since(tl);

    auto tv = Clock::now();
    std::vector<StateD> cex;
    int verified = verify_candidates(
        ls, cands,
        [&](const ExprPtr& inv) {
          return check_exact(inv, prog, postE, cfg.verification_domain(), cfg.verifier, cfg.seed);
        },
        &rec, &cex);
    report.time_verification += seconds_since(tv);

    if (verified >= 0) {
      report.iterations.push_back(std::move(rec));
      break;
    }
    // Dedup counterexample states before weighting.
    std::vector<StateD> distinct;
    for (auto& c : cex) {
      bool dup = false;
      for (auto& p : distinct) {
        if (p == c) dup = true;
      }
      if (!dup) distinct.push_back(c);
    }
    rec.counterexamples_added = static_cast<int>(distinct.size());
    report.iterations.push_back(std::move(rec));

    std::vector<StateD> fresh = sample_states(prog, cfg.nstates, cfg.domain, ls.rng.split(2 * iter + 2));
    states = augment_states(states, distinct, cfg.cex_copies, fresh);
  }

  report.timed_out = !report.verified;
  report.time_total = seconds_since(ls.t0);
  return report;
}

RunReport run_sub(const Program& prog, const ExprPtr& preE, const ExprPtr& postE,
                  const RunConfig& cfg) {
  RunReport report;
  report.program_name = prog.name;
  report.mode = "sub";
  report.post = to_string(postE);
  report.pre = to_string(preE);
  report.config = cfg;
  LoopShared ls(prog, cfg, report);

  auto [fl, fm] = get_features(prog, postE, cfg.feature_cap);
  std::vector<StateD> states = sample_states(prog, cfg.nstates, cfg.domain, ls.rng.split(0));
  SubDataset data;

  for (int iter = 0; !ls.timed_out(); ++iter) {
    IterationRecord rec;
    rec.index = iter;

    auto ts = Clock::now();
    SubDataset fresh_rows = sample_traces_sub(prog, states, cfg.nruns, ls.rng.split(2 * iter + 1));
    data.rows.insert(data.rows.end(), fresh_rows.rows.begin(), fresh_rows.rows.end());
    rec.dataset_rows = static_cast<long>(data.rows.size());
    if (!cfg.dump_path.empty()) {
      std::ofstream(cfg.dump_path) << dataset_to_text(data, *prog.vars);
    }
    report.time_sampling += seconds_since(ts);

    auto tl = Clock::now();
    std::vector<Candidate> cands;
    for (const FeatureSet* feats : {&fl, &fm}) {
      SubFitData fit = prepare_sub_data(data, *feats, preE, postE, prog.guard);
      SoftTree best;
      double best_loss = std::numeric_limits<double>::infinity();
      std::vector<std::pair<int, double>> best_curve;
      for (int d = 0; d <= cfg.max_split_features && d <= 3; ++d) {
        for (int r = 0; r < cfg.restarts; ++r) {
          TrainHyper hyper = cfg.train;
          hyper.seed = cfg.seed;
          hyper.restart_index = r;
          SoftTree st = make_soft_tree(*feats, fit, d, hyper);
          std::vector<std::pair<int, double>> curve;
          try {
            st = train(st, fit, hyper, &curve);
          } catch (const std::exception&) {
            continue;  // diverged restart
          }
          double loss = sub_loss(st, fit);
          if (loss < best_loss) {
            best_loss = loss;
            best = st;
            best_curve = std::move(curve);
          }
        }
        // Deeper trees only when the single leaf cannot fit.
        if (best_loss <= 1e-6) break;
        if (ls.timed_out()) break;
      }
      if (!std::isfinite(best_loss)) continue;
      if (feats->kind == LeafKind::Linear) {
        rec.loss_linear = best_loss;
        rec.curve_linear = std::move(best_curve);
      } else {
        rec.loss_mult = best_loss;
        rec.curve_mult = std::move(best_curve);
      }
      push_candidates(&cands, harden(best, *feats, fit), *feats, postE, prog.guard);
    }
    order_candidates(&cands);
    report.time_learning += seconds_since(tl);

    auto tv = Clock::now();
    std::vector<StateD> cex;
    int verified = verify_candidates(
        ls, cands,
        [&](const ExprPtr& inv) {
          return check_sub(inv, prog, preE, postE, cfg.verification_domain(), cfg.verifier,
                           cfg.seed);
        },
        &rec, &cex);
    report.time_verification += seconds_since(tv);

    if (verified >= 0) {
      report.iterations.push_back(std::move(rec));
      break;
    }
    std::vector<StateD> distinct;
    for (auto& c : cex) {
      bool dup = false;
      for (auto& p : distinct) {
        if (p == c) dup = true;
      }
      if (!dup) distinct.push_back(c);
    }
    rec.counterexamples_added = static_cast<int>(distinct.size());
    report.iterations.push_back(std::move(rec));

    std::vector<StateD> fresh = sample_states(prog, cfg.nstates, cfg.domain, ls.rng.split(2 * iter + 2));
    states = augment_states(states, distinct, cfg.cex_copies, fresh);
  }

  report.timed_out = !report.verified;
  report.time_total = seconds_since(ls.t0);
  return report;
}

std::string RunReport::to_json(bool omit_timings) const {
  nlohmann::ordered_json j;
  j["program"] = program_name;
  j["mode"] = mode;
  j["post"] = post;
  if (!pre.empty()) j["pre"] = pre;
  nlohmann::ordered_json cj;
  cj["nruns"] = config.nruns;
  cj["nstates"] = config.nstates;
  cj["timeout_sec"] = config.timeout_sec;
  cj["seed"] = config.seed;
  cj["domain"] = config.domain.to_string();
  cj["verification_domain"] = config.verification_domain().to_string();
  cj["cex_copies"] = config.cex_copies;
  cj["restarts"] = config.restarts;
  j["config"] = std::move(cj);

  nlohmann::ordered_json outcome;
  outcome["status"] = verified ? "verified" : "timeout";
  if (verified) {
    outcome["invariant"] = invariant;
    // The final verdict needs the variable table; candidate records carry the
    // per-candidate detail, so here a compact copy suffices.
    nlohmann::ordered_json vj;
    vj["status"] = verdict_status_name(verdict.status);
    vj["detail"] = verdict.detail;
    vj["side_conditions"] = verdict.side_conditions;
    if (verdict.status == VerdictStatus::VerifiedBounded) {
      vj["numeric_bound"] = verdict.numeric_bound;
    }
    outcome["verdict"] = std::move(vj);
  }
  j["outcome"] = std::move(outcome);

  nlohmann::ordered_json iters = nlohmann::ordered_json::array();
  for (auto& it : iterations) {
    nlohmann::ordered_json ij;
    ij["iteration"] = it.index;
    ij["dataset_rows"] = it.dataset_rows;
    if (it.loss_linear >= 0) ij["loss_linear"] = it.loss_linear;
    if (it.loss_mult >= 0) ij["loss_mult"] = it.loss_mult;
    if (!it.warnings.empty()) ij["warnings"] = it.warnings;
    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (auto& c : it.candidates) {
      nlohmann::ordered_json cjj;
      cjj["kind"] = c.kind;
      cjj["scheme"] = c.scheme;
      cjj["splits"] = c.splits;
      cjj["iprime"] = c.iprime;
      cjj["invariant"] = c.invariant;
      cjj["status"] = c.status;
      if (c.top_violation > 0) cjj["top_violation"] = c.top_violation;
      if (!c.counterexamples.empty()) cjj["counterexamples"] = c.counterexamples;
      if (!c.side_conditions.empty()) cjj["side_conditions"] = c.side_conditions;
      if (!c.detail.empty()) cjj["detail"] = c.detail;
      cands.push_back(std::move(cjj));
    }
    ij["candidates"] = std::move(cands);
    ij["counterexamples_added"] = it.counterexamples_added;
    auto curve_json = [](const std::vector<std::pair<int, double>>& curve) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (auto& [e, l] : curve) arr.push_back({e, l});
      return arr;
    };
    if (!it.curve_linear.empty()) ij["training_curve_linear"] = curve_json(it.curve_linear);
    if (!it.curve_mult.empty()) ij["training_curve_mult"] = curve_json(it.curve_mult);
    iters.push_back(std::move(ij));
  }
  j["iterations"] = std::move(iters);

  if (!omit_timings) {
    nlohmann::ordered_json tj;
    tj["sampling_sec"] = time_sampling;
    tj["learning_sec"] = time_learning;
    tj["verification_sec"] = time_verification;
    tj["total_sec"] = time_total;
    j["timings"] = std::move(tj);
  }
  return j.dump(2) + "\n";
}

}  // namespace exist
