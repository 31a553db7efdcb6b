#include "exist/sampler.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "exist/eval.hpp"

namespace exist {

void SamplingDomain::validate() const {
  if (!(0 < p_lo && p_lo <= p_hi && p_hi < 1)) {
    throw std::invalid_argument("prob range must satisfy 0 < lo <= hi < 1");
  }
  if (n_lo > n_hi || x_lo > x_hi) throw std::invalid_argument("empty sampling range");
}

SamplingDomain SamplingDomain::parse(const std::string& spec) {
  SamplingDomain d;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    auto eq = part.find('=');
    auto colon = part.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos) {
      throw std::invalid_argument("bad domain spec '" + part + "' (want key=lo:hi)");
    }
    std::string key = part.substr(0, eq);
    std::string lo = part.substr(eq + 1, colon - eq - 1);
    std::string hi = part.substr(colon + 1);
    if (key == "prob") {
      d.p_lo = std::stod(lo);
      d.p_hi = std::stod(hi);
    } else if (key == "int") {
      d.n_lo = std::stoll(lo);
      d.n_hi = std::stoll(hi);
    } else if (key == "real") {
      d.x_lo = std::stod(lo);
      d.x_hi = std::stod(hi);
    } else {
      throw std::invalid_argument("unknown domain key '" + key + "'");
    }
  }
  d.validate();
  return d;
}

std::string SamplingDomain::to_string() const {
  std::ostringstream os;
  os << "prob=" << p_lo << ":" << p_hi << ",int=" << n_lo << ":" << n_hi << ",real=" << x_lo
     << ":" << x_hi;
  return os.str();
}

std::vector<StateD> sample_states(const Program& prog, int nstates, const SamplingDomain& dom,
                                  const RandomStream& rng) {
  dom.validate();
  const VarTable& vars = *prog.vars;
  std::vector<StateD> out(nstates);
  for (int i = 0; i < nstates; ++i) {
    RandomStream sub = rng.split(i);
    StateD s(vars.size());
    for (int v = 0; v < vars.size(); ++v) {
      switch (vars.types[v]) {
        case VarType::Bool: s[v] = static_cast<double>(sub.uniform_int(0, 1)); break;
        case VarType::Int: s[v] = static_cast<double>(sub.uniform_int(dom.n_lo, dom.n_hi)); break;
        case VarType::Prob: s[v] = sub.uniform_real(dom.p_lo, dom.p_hi); break;
        case VarType::Real: s[v] = sub.uniform_real(dom.x_lo, dom.x_hi); break;
      }
    }
    out[i] = std::move(s);
  }
  return out;
}

namespace {

uint64_t lane(int state_idx, int trial) {
  return (static_cast<uint64_t>(state_idx) << 32) | static_cast<uint64_t>(trial);
}

struct DeferredError {
  long flat = -1;
  std::string message;
  bool max_iters = false;
  std::string state_desc;
};

}  // namespace

ExactDataset sample_traces_exact_serial(const Program& prog, const ExprPtr& postE,
                                        const std::vector<StateD>& states, int nruns,
                                        long max_iters, const RandomStream& rng) {
  ExactDataset out;
  for (size_t i = 0; i < states.size(); ++i) {
    if (!eval_bool(prog.guard, states[i])) continue;
    double sum = 0;
    for (int t = 0; t < nruns; ++t) {
      RandomStream sub = rng.split(lane(static_cast<int>(i), t));
      try {
        StateD final_state = run_to_termination(prog, states[i], sub, max_iters);
        sum += eval_expectation(postE, final_state);
      } catch (const MaxIterationsExceeded&) {
        throw MaxIterationsExceeded(describe_state(states[i], *prog.vars));
      }
    }
    out.rows.push_back({states[i], sum / nruns, nruns});
  }
  return out;
}

ExactDataset sample_traces_exact(const Program& prog, const ExprPtr& postE,
                                 const std::vector<StateD>& states, int nruns, long max_iters,
                                 const RandomStream& rng) {
  // Retained (guard-true) rows keep their original state index so substreams
  // do not depend on how many guard-false states precede them.
  std::vector<int> retained;
  for (size_t i = 0; i < states.size(); ++i) {
    if (eval_bool(prog.guard, states[i])) retained.push_back(static_cast<int>(i));
  }
  const long total = static_cast<long>(retained.size()) * nruns;
  std::vector<double> vals(total);
  DeferredError err;

#pragma omp parallel for schedule(dynamic, 64)
  for (long flat = 0; flat < total; ++flat) {
    int r = static_cast<int>(flat / nruns);
    int t = static_cast<int>(flat % nruns);
    int i = retained[r];
    RandomStream sub = rng.split(lane(i, t));
    try {
      StateD final_state = run_to_termination(prog, states[i], sub, max_iters);
      vals[flat] = eval_expectation(postE, final_state);
    } catch (const std::exception& e) {
#pragma omp critical
      if (err.flat < 0 || flat < err.flat) {
        err.flat = flat;
        err.message = e.what();
        err.max_iters = dynamic_cast<const MaxIterationsExceeded*>(&e) != nullptr;
        err.state_desc = describe_state(states[i], *prog.vars);
      }
    }
  }
  if (err.flat >= 0) {
    if (err.max_iters) throw MaxIterationsExceeded(err.state_desc);
    throw EvalError(err.message + " from state " + err.state_desc);
  }

  ExactDataset out;
  out.rows.reserve(retained.size());
  for (size_t r = 0; r < retained.size(); ++r) {
    double sum = 0;
    for (int t = 0; t < nruns; ++t) sum += vals[r * nruns + t];
    out.rows.push_back({states[retained[r]], sum / nruns, nruns});
  }
  return out;
}

SubDataset sample_traces_sub_serial(const Program& prog, const std::vector<StateD>& states,
                                    int nruns, const RandomStream& rng) {
  SubDataset out;
  for (size_t i = 0; i < states.size(); ++i) {
    SubRow row;
    row.state = states[i];
    row.guard_true = eval_bool(prog.guard, states[i]);
    if (row.guard_true) {
      row.succs.reserve(nruns);
      for (int t = 0; t < nruns; ++t) {
        RandomStream sub = rng.split(lane(static_cast<int>(i), t));
        row.succs.push_back(step_body(prog, states[i], sub));
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

SubDataset sample_traces_sub(const Program& prog, const std::vector<StateD>& states, int nruns,
                             const RandomStream& rng) {
  SubDataset out;
  out.rows.resize(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    out.rows[i].state = states[i];
    out.rows[i].guard_true = eval_bool(prog.guard, states[i]);
    if (out.rows[i].guard_true) out.rows[i].succs.resize(nruns);
  }
  DeferredError err;
  const long n = static_cast<long>(states.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    if (!out.rows[i].guard_true) continue;
    for (int t = 0; t < nruns; ++t) {
      RandomStream sub = rng.split(lane(static_cast<int>(i), t));
      try {
        out.rows[i].succs[t] = step_body(prog, states[i], sub);
      } catch (const std::exception& e) {
#pragma omp critical
        if (err.flat < 0 || i < err.flat) {
          err.flat = i;
          err.message = std::string(e.what()) + " from state " +
                        describe_state(states[i], *prog.vars);
        }
      }
    }
  }
  if (err.flat >= 0) throw EvalError(err.message);
  return out;
}

namespace {

std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_state(std::string& s, const StateD& st, const VarTable& vars) {
  for (size_t v = 0; v < st.size(); ++v) {
    if (v) s += " ";
    s += vars.names[v] + "=" + fmt_value(st[v]);
  }
}

}  // namespace

std::string dataset_to_text(const ExactDataset& d, const VarTable& vars) {
  std::string out;
  for (auto& row : d.rows) {
    out += "state ";
    append_state(out, row.state, vars);
    out += " | v=" + fmt_value(row.v) + " trials=" + std::to_string(row.trials) + "\n";
  }
  return out;
}

std::string dataset_to_text(const SubDataset& d, const VarTable& vars) {
  std::string out;
  for (auto& row : d.rows) {
    out += "state ";
    append_state(out, row.state, vars);
    out += " | succs=" + std::to_string(row.succs.size()) + "\n";
    for (auto& s : row.succs) {
      out += "  -> ";
      append_state(out, s, vars);
      out += "\n";
    }
  }
  return out;
}

}  // namespace exist
