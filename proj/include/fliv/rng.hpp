#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fliv {

using Rng = std::mt19937_64;

// splitmix64 finalizer; good avalanche for turning structured keys into seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives the seed of a named sub-stream from a master seed and a key path,
/// e.g. derive_seed(master, {replicate, kStreamU}). Distinct key paths give
/// statistically independent streams; the mapping is platform-independent.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(master);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(master, keys));
}

}  // namespace fliv
