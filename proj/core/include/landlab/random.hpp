#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace landlab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for run `index` of stream `stream` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>{0, n - 1}(rng);
}

/// Uniform over [0, n) excluding `current`; requires n >= 2.
inline std::size_t uniform_index_except(Rng& rng, std::size_t n, std::size_t current) {
  std::size_t pick = uniform_index(rng, n - 1);
  return pick >= current ? pick + 1 : pick;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>{lo, hi}(rng);
}

inline bool coin(Rng& rng) { return uniform_index(rng, 2) == 1; }

}  // namespace landlab
