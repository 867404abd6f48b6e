#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace clric {

// SplitMix64 finalizer. Used to derive per-candidate seeds from a run seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 1));
}

// Deterministic generator. The distribution helpers are written out by hand
// because std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 24 bits of resolution (exact in float).
  float uniform01() { return static_cast<float>(engine_() >> 40) * 0x1.0p-24f; }

  float uniform(float lo, float hi) { return lo + (hi - lo) * uniform01(); }

  double uniform01_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Box-Muller.
  double normal() {
    double u1 = uniform01_double();
    while (u1 <= 0.0) u1 = uniform01_double();
    const double u2 = uniform01_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace clric
