#pragma once

#include <cstdint>
#include <random>

namespace conformal {

// splitmix64 finalizer; used to decorrelate (seed, stream) pairs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e9b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for one logical row of a batch; scheduling-invariant.
inline std::mt19937_64 row_rng(std::uint64_t seed, std::uint64_t row) {
  return std::mt19937_64(mix64(seed ^ mix64(row)));
}

inline double uniform01(std::mt19937_64& g) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

}  // namespace conformal
