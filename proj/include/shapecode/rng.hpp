#pragma once

#include <cstdint>
#include <random>

namespace shapecode {

// Stream derivation and bounded draws are pinned here so that results are
// reproducible bit-for-bit across platforms and thread counts (mt19937_64's
// output sequence is fixed by the standard; std::uniform_int_distribution's
// is not, so it is not used).

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Engine seed for stream `stream` of a run seeded `seed`.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/// Unbiased draw from [0, n) by rejection on raw engine output.
inline std::uint64_t bounded_u64(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = g();
  } while (r >= limit);
  return r % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double u01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace shapecode
