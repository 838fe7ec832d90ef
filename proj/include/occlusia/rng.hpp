#pragma once

// Deterministic random helpers. The standard distributions are
// implementation-defined sequences, so tests that freeze expected values
// would break across toolchains; these transforms are pinned instead.

#include <cmath>
#include <cstdint>
#include <random>

namespace occlusia {

using Rng = std::mt19937_64;

/// Uniform double in [0,1) using the top 53 bits of the generator.
inline double uniform01(Rng& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

/// Uniform integer in [lo, hi] inclusive.
inline int uniform_int(Rng& g, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(g() % span);
}

/// Standard normal via Box-Muller. Draws two variates per call and
/// discards the second; cheap enough here and keeps call sites stateless.
inline double gaussian(Rng& g) {
  double u1 = uniform01(g);
  const double u2 = uniform01(g);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

inline double gaussian(Rng& g, double mean, double sigma) {
  return mean + sigma * gaussian(g);
}

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable per-pixel hash for procedural textures: same (x, y, seed)
/// always yields the same value, independent of evaluation order.
inline std::uint64_t hash2d(int x, int y, std::uint64_t seed) {
  std::uint64_t v = seed;
  v = splitmix64(v ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 1));
  v = splitmix64(v ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 33));
  return v;
}

}  // namespace occlusia
