#pragma once

#include <cstdint>
#include <random>

namespace fopdg {

// Seeded RNG with explicit uniform mappings, so streams are identical
// across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // Unbiased integer in [0, n).
  std::uint64_t integer(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace fopdg
