#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "sbf/geometry.hpp"

namespace sbf {

/// Derive the seed of a labeled sub-stream from the root seed (FNV-1a mix).
inline uint64_t substream_seed(uint64_t root, std::string_view label) {
  uint64_t h = 14695981039346656037ull;
  auto mix = [&h](uint64_t byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < 8; ++i) mix((root >> (8 * i)) & 0xffu);
  for (unsigned char c : label) mix(c);
  return h;
}

/// Deterministic random stream. Uniform and Gaussian draws are generated
/// from raw engine output so that results do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  /// Uniform on (0, 1].
  double uniform01() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller. Stateless across calls (no cached pair).
  double gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec uniform_in(const Box& b) {
    Vec p(b.dim());
    for (int d = 0; d < b.dim(); ++d) p[d] = uniform(b.lower[d], b.upper[d]);
    return p;
  }

  /// Integer in [0, n).
  int index(int n) {
    const double u = uniform01();
    int k = static_cast<int>(u * n);
    return k >= n ? n - 1 : k;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sbf
