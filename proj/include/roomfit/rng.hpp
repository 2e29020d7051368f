#pragma once

#include <cstdint>

namespace roomfit {

// SplitMix64. Small, fast, and identical output on every platform, which the
// seeded fixtures and determinism tests rely on.
struct Rng {
  uint64_t state = 0;

  explicit Rng(uint64_t seed) : state(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  Rng fork(uint64_t stream) { return Rng(next_u64() ^ (stream * 0xd6e8feb86659fd93ULL)); }
};

}  // namespace roomfit
