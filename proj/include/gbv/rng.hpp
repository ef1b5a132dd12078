#pragma once

#include <cstdint>

#include "gbv/scalar.hpp"

namespace gbv {

// Deterministic splitmix64 generator.  Standard-library distributions are
// implementation-defined, so seeded runs would not be reproducible across
// toolchains; this keeps golden outputs stable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // inclusive bounds
  int uniform(int lo, int hi) {
    return lo + int(next() % uint64_t(hi - lo + 1));
  }

  // small exact rational, numerator in [-4,4], denominator in {1,2,3}
  GRat rational() { return GRat(uniform(-4, 4), uniform(1, 3)); }

  GRat nonzero_rational() {
    GRat g = rational();
    while (g.is_zero()) g = rational();
    return g;
  }

 private:
  uint64_t state_;
};

}  // namespace gbv
