#pragma once

#include <cstdint>
#include <random>

namespace ccl {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates nearby seed values.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent stream per (seed, stream) pair. Streams with the same seed but
// different stream ids never share state.
inline Rng seeded_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(mix64(seed + mix64(stream)));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace ccl
