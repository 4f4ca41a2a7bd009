#pragma once

#include <cstdint>
#include <random>

namespace tsk {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of an independent stream: derive_seed(master, a, b, ...) hashes the
// master seed together with a path of counters (split index, run index, ...).
// The same path always yields the same seed, different paths are decorrelated.
template <typename... Counters>
constexpr std::uint64_t derive_seed(std::uint64_t master, Counters... path) {
  std::uint64_t s = mix64(master);
  ((s = mix64(s ^ mix64(static_cast<std::uint64_t>(path) + 0x632be59bd9b4e019ULL))), ...);
  return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace tsk
