#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lube/types.hpp"

namespace lube {

// Deterministic random helpers. Draws go through fixed bit-level recipes
// instead of std:: distributions, whose output is implementation-defined;
// a given seed must reproduce the same stream on any standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53 significant bits.
  Real uniform01() { return static_cast<Real>(engine_() >> 11) * 0x1.0p-53; }

  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; two uniforms per draw, no cached state.
  Real normal() {
    Real u1 = uniform01();
    Real u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Uniform index in [0, n). Modulo bias is negligible for n << 2^64.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  // Fisher-Yates; std::shuffle is implementation-defined.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

private:
  std::mt19937_64 engine_;
};

// Decorrelated seed for the k-th sub-stream of a run (splitmix64 finalizer).
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace lube
