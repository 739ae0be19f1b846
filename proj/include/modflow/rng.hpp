#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "modflow/core.hpp"

namespace modflow {

/// Seeded random stream with fixed per-call engine consumption, so that a
/// truncated rollout consumes the same prefix of draws as a full one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1). One engine call.
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]. One engine call.
  double uniform_open0() { return ((eng_() >> 11) + 1) * 0x1.0p-53; }

  /// Box-Muller pair of independent standard normals. Two engine calls.
  std::pair<double, double> normal_pair() {
    const double u1 = uniform_open0();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
  }

  /// Seed for an independent sub-stream. One engine call.
  std::uint64_t next_seed() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

/// Deterministic seed mixing (splitmix64 finalizer) for deriving per-cell
/// or per-case sub-seeds independent of iteration order.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace modflow
