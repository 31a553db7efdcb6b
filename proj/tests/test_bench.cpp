#include "doctest.h"
#include "exist/bench.hpp"
#include "exist/eval.hpp"
#include "exist/parser.hpp"

using namespace exist;

TEST_CASE("registry holds all 18 programs and they parse") {
  const auto& entries = registry();
  CHECK(entries.size() == 18);
  const char* names[] = {"biasdir", "bin0", "bin1",   "bin2", "deprv",   "detm",
                         "fair",    "duel", "gambler", "geo0", "geo1",    "geo2",
                         "geoar",   "linexp", "mart",  "prinsys", "revbin", "sum0"};
  for (auto* n : names) {
    const BenchmarkEntry* e = find_benchmark(n);
    REQUIRE(e != nullptr);
    Program p = load_benchmark(*e);
    CHECK(p.vars->size() > 0);
    CHECK_NOTHROW(parse_expectation(e->post, p.vars));
    for (auto& sub : e->sub_instances) {
      CHECK_NOTHROW(parse_expectation(sub.pre, p.vars));
      if (!sub.expected.empty()) CHECK_NOTHROW(parse_expectation(sub.expected, p.vars));
    }
    if (!e->expected_invariant.empty()) {
      CHECK_NOTHROW(parse_expectation(e->expected_invariant, p.vars));
    }
  }
}

TEST_CASE("lookups") {
  const BenchmarkEntry* m = find_benchmark("mart");
  REQUIRE(m != nullptr);
  CHECK(m->post == "rounds");
  const BenchmarkEntry* g = find_benchmark("GeoAr");
  REQUIRE(g != nullptr);
  CHECK(g->source.find("feature 1 / p;") != std::string::npos);
  CHECK(find_benchmark("unknown") == nullptr);
}

TEST_CASE("registered programs execute a body step") {
  for (auto& e : registry()) {
    Program p = load_benchmark(e);
    SamplingDomain dom;
    auto states = sample_states(p, 4, dom, RandomStream(1));
    RandomStream rng(2);
    for (auto& s : states) {
      CHECK_NOTHROW(step_body(p, s, rng));
    }
  }
}
