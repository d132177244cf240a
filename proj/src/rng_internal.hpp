#pragma once

// Counter-based deterministic random streams shared by the Monte Carlo
// components.  Every draw is a pure function of (seed, stream, counter), so
// results are independent of evaluation order and of any threading schedule.

#include <cmath>
#include <cstdint>

namespace qsurf {
namespace detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform double in (0,1), indexed draw k of the given stream.
inline double sub_uniform(uint64_t seed, uint64_t stream, uint64_t k) {
  uint64_t x = splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
  x = splitmix64(x + k * 0x9E3779B97F4A7C15ull);
  return ((double)(x >> 11) + 0.5) * 0x1.0p-53;
}

// Standard Gaussian via Box-Muller; draw k consumes uniforms 2k and 2k+1.
inline double sub_gaussian(uint64_t seed, uint64_t stream, uint64_t k) {
  double u1 = sub_uniform(seed, stream, 2 * k);
  double u2 = sub_uniform(seed, stream, 2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace detail
}  // namespace qsurf
