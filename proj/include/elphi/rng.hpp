#pragma once

// Reproducible random number generation. The generator is SplitMix64
// (Vigna's public-domain mixer): a 64-bit counter advanced by the golden
// gamma with an avalanching finalizer. Independent streams are obtained by
// deriving fresh seeds with derive_seed, so parallel replications never
// share state. Normal variates come from the inverse distribution function,
// which keeps every draw a pure function of (seed, draw index).

#include <cstdint>

#include "elphi/special.hpp"

namespace elphi {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(uniform01()); }

 private:
  std::uint64_t state_;
};

// Derives a decorrelated child seed from (seed, salt). Used to key
// per-model / per-size / per-replication streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + (salt + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace elphi
