#pragma once

#include "exist/cegis.hpp"

namespace exist {

struct SubInstance {
  std::string pre;
  std::string expected;  // verified learned invariant; empty when none is on record
};

struct BenchmarkEntry {
  std::string name;
  std::string source;  // .pw text, user features included as feature lines
  std::string post;
  std::string expected_invariant;  // empty when none is on record
  bool synthesis_target = true;    // false: stored for verifier regression only
  std::vector<SubInstance> sub_instances;
};

// The benchmark corpus: BiasDir, Bin0, Bin1, Bin2, DepRV, Detm, Fair, Duel,
// Gambler, Geo0, Geo1, Geo2, GeoAr, LinExp, Mart, Prinsys, RevBin, Sum0.
const std::vector<BenchmarkEntry>& registry();

// Case-insensitive lookup; nullptr when absent.
const BenchmarkEntry* find_benchmark(const std::string& name);

Program load_benchmark(const BenchmarkEntry& entry);

}  // namespace exist
