#pragma once

#include <cstdint>
#include <random>

namespace tanova {

// SplitMix64 finalizer.  Used to turn (seed, stream) pairs into decorrelated
// engine seeds so parallel replicates can each own an independent stream.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic engine for logical stream (seed, stream, substream).
// Replicate b of a permutation run draws from stream b regardless of how the
// replicates are scheduled across threads, so results are reproducible and
// independent of thread count.
inline std::mt19937_64 rng_stream(std::uint64_t seed,
                                  std::uint64_t stream = 0,
                                  std::uint64_t substream = 0) {
    const std::uint64_t key = mix64(mix64(mix64(seed) ^ stream) ^ substream);
    return std::mt19937_64(key);
}

}  // namespace tanova
