#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace geodist::rng {

// mt19937_64 output is fully specified by the standard; all derived draws
// below avoid std::uniform_*_distribution, whose mapping is
// implementation-defined, so streams are reproducible across toolchains.
using Engine = std::mt19937_64;

/// Uniform double in [0, 1) using the top 53 bits of one engine draw.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Unbiased uniform integer in [0, n) via rejection sampling. n must be > 0.
inline std::uint64_t below(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

/// Fisher-Yates shuffle with portable draws.
template <typename T>
void shuffle(std::vector<T>& values, Engine& eng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(below(eng, i));
    std::swap(values[i - 1], values[j]);
  }
}

/// Seed for a derived stream. Fixed additive offsets keep the scheme easy
/// to echo in run configs: stream k of a run with master seed s is s + k.
inline std::uint64_t derive(std::uint64_t master, std::uint64_t offset) {
  return master + offset;
}

}  // namespace geodist::rng
