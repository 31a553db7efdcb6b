#include "doctest.h"
#include "exist/bench.hpp"
#include "exist/cegis.hpp"
#include "exist/parser.hpp"

using namespace exist;

namespace {

RunConfig quick_config(uint64_t seed) {
  RunConfig cfg;
  cfg.nruns = 300;
  cfg.nstates = 120;
  cfg.timeout_sec = 120;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("augment_states weights counterexamples by copies") {
  StateD a{1.0}, b{2.0}, f{3.0};
  auto out = augment_states({a}, {b}, 10, {f});
  CHECK(out.size() == 12);
  int copies = 0;
  for (auto& s : out) copies += s == b;
  CHECK(copies == 10);
  // Empty counterexample list: states plus fresh only.
  auto out2 = augment_states({a}, {}, 10, {f});
  CHECK(out2.size() == 2);
  // Duplicates accumulate across calls.
  auto out3 = augment_states(out, {b}, 10, {});
  int copies3 = 0;
  for (auto& s : out3) copies3 += s == b;
  CHECK(copies3 == 20);
}

TEST_CASE("run_exact synthesizes the detm invariant") {
  const BenchmarkEntry* e = find_benchmark("detm");
  REQUIRE(e);
  Program p = load_benchmark(*e);
  RunConfig cfg = quick_config(1);
  RunReport r = run_exact(p, parse_expectation(e->post, p.vars), cfg);
  REQUIRE(r.verified);
  CHECK(r.verdict.status == VerdictStatus::VerifiedExact);
  ExprPtr got = parse_expectation(r.invariant, p.vars);
  ExprPtr want = parse_expectation(e->expected_invariant, p.vars);
  CHECK(expectations_semantically_equal(got, want, p.vars));
}

TEST_CASE("run_exact synthesizes the geo0 invariant (multiplicative leaf)") {
  const BenchmarkEntry* e = find_benchmark("geo0");
  REQUIRE(e);
  Program p = load_benchmark(*e);
  RunConfig cfg = quick_config(1);
  RunReport r = run_exact(p, parse_expectation(e->post, p.vars), cfg);
  REQUIRE(r.verified);
  ExprPtr got = parse_expectation(r.invariant, p.vars);
  ExprPtr want = parse_expectation(e->expected_invariant, p.vars);
  CHECK(expectations_semantically_equal(got, want, p.vars));
}

TEST_CASE("degenerate timeout produces a timeout outcome with no iterations") {
  const BenchmarkEntry* e = find_benchmark("detm");
  REQUIRE(e);
  Program p = load_benchmark(*e);
  RunConfig cfg = quick_config(1);
  cfg.timeout_sec = 0.0;
  RunReport r = run_exact(p, parse_expectation(e->post, p.vars), cfg);
  CHECK(!r.verified);
  CHECK(r.timed_out);
  CHECK(r.iterations.empty());
}

TEST_CASE("run_sub learns the trivial revbin sub-invariant") {
  const BenchmarkEntry* e = find_benchmark("revbin");
  REQUIRE(e);
  Program p = load_benchmark(*e);
  RunConfig cfg = quick_config(2);
  RunReport r = run_sub(p, parse_expectation("z", p.vars), parse_expectation("z", p.vars), cfg);
  REQUIRE(r.verified);
  ExprPtr got = parse_expectation(r.invariant, p.vars);
  CHECK(expectations_semantically_equal(got, parse_expectation("z", p.vars), p.vars));
}

TEST_CASE("run_sub learns the mart sub-invariant") {
  const BenchmarkEntry* e = find_benchmark("mart");
  REQUIRE(e);
  Program p = load_benchmark(*e);
  RunConfig cfg = quick_config(3);
  RunReport r = run_sub(p, parse_expectation("rounds + [b > 0] * 1", p.vars),
                        parse_expectation("rounds", p.vars), cfg);
  REQUIRE(r.verified);
  ExprPtr got = parse_expectation(r.invariant, p.vars);
  ExprPtr want = parse_expectation("rounds + [b > 0] * 1", p.vars);
  CHECK(expectations_semantically_equal(got, want, p.vars));
}

TEST_CASE("reports are deterministic modulo timings and dataset growth is monotone") {
  const BenchmarkEntry* e = find_benchmark("detm");
  REQUIRE(e);
  Program p = load_benchmark(*e);
  RunConfig cfg = quick_config(7);
  RunReport a = run_exact(p, parse_expectation(e->post, p.vars), cfg);
  RunReport b = run_exact(p, parse_expectation(e->post, p.vars), cfg);
  CHECK(a.to_json(true) == b.to_json(true));
  long prev = 0;
  for (auto& it : a.iterations) {
    CHECK(it.dataset_rows > prev);
    prev = it.dataset_rows;
  }
}

TEST_CASE("reports include config and outcome fields") {
  const BenchmarkEntry* e = find_benchmark("detm");
  REQUIRE(e);
  Program p = load_benchmark(*e);
  RunConfig cfg = quick_config(4);
  RunReport r = run_exact(p, parse_expectation(e->post, p.vars), cfg);
  std::string j = r.to_json();
  CHECK(j.find("\"status\": \"verified\"") != std::string::npos);
  CHECK(j.find("\"timings\"") != std::string::npos);
  CHECK(r.to_json(true).find("\"timings\"") == std::string::npos);
}
