#pragma once

#include <cstdint>
#include <random>

namespace regiosim {

/// splitmix64 step; the usual seeding/mixing primitive.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic per-task seed derived from (seed, index). Used so that
/// permutation tests, multi-start optimizers and replication studies give
/// results independent of execution order or parallel chunking.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

inline std::mt19937_64 engine_for(std::uint64_t seed, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, index));
}

}  // namespace regiosim
