#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "evodrive/geometry.hpp"

namespace evodrive {

// splitmix64 finalizer; used to mix seed material into stream keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed for activity `tag` of a master-seeded job (one per run, per
// behavior build, ...); distinct tags give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix64(mix64(master) + tag);
}

// Seedable random stream. Every concurrent activity owns its own stream,
// derived from a master seed and an integer path, so results never depend
// on evaluation order. Distributions are implemented here rather than with
// std::*_distribution to keep sequences stable across standard libraries.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t v : path) h = mix64(h ^ mix64(v));
    return RngStream(h);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // Standard normal via Box-Muller; one spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace evodrive
