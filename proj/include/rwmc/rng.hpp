#pragma once

#include <cstdint>
#include <random>

namespace rwmc {

// All sampling uses the 64-bit Mersenne Twister (std::mt19937_64). A
// generator is keyed by (seed, stream): both words are split into 32-bit
// halves and fed through std::seed_seq, so distinct streams drawn from the
// same user seed are decorrelated while staying reproducible.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

// Uniform integer in [0, n). n must be positive.
template <typename Int>
Int uniform_index(Rng& rng, Int n) {
  return std::uniform_int_distribution<Int>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace rwmc
