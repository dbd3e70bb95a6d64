#pragma once

#include <cstdint>
#include <random>

namespace twp {

// All randomness flows through mt19937_64 with explicit seeds; the raw
// engine stream is specified by the standard, so seeded runs reproduce
// bit-identically across builds.  Distribution sampling is hand-rolled in
// distfit.cpp because std:: distributions are implementation-defined.
using Rng = std::mt19937_64;

// Uniform double in [0, 1), 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1], safe as a log() argument.
inline double uniform_pos(Rng& rng) { return 1.0 - uniform01(rng); }

// Uniform integer in [0, n).
inline uint64_t uniform_below(Rng& rng, uint64_t n) {
  // Rejection sampling keeps the draw exactly uniform.
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace twp
