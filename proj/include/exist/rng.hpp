#pragma once

#include <cstdint>

namespace exist {

// Splittable counter-style PRNG (splitmix64 core). Hand-rolled so that
// sequences are identical across platforms and standard library versions;
// split() derives statistically independent substreams so each (state, trial)
// pair can be sampled in parallel with reproducible results.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : state_(mix(seed ^ kInitSalt)) {}

  // Independent child stream for lane `lane`; does not advance this stream.
  RandomStream split(uint64_t lane) const {
    return RandomStream(FromState{}, mix(state_ ^ mix(lane + kSplitSalt)));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_unit() < p; }

  // Uniform integer in [lo, hi], inclusive, unbiased via rejection.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>(next_u64());  // full range
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % span);
  }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  struct FromState {};
  RandomStream(FromState, uint64_t raw) : state_(raw) {}

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr uint64_t kInitSalt = 0x5851f42d4c957f2dULL;
  static constexpr uint64_t kSplitSalt = 0xd1342543de82ef95ULL;

  uint64_t state_;
};

}  // namespace exist
