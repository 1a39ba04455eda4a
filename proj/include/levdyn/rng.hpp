#pragma once

#include <cstdint>
#include <random>

namespace levdyn {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; decorrelates (master seed, stream index) pairs so each
// worker, realization or grid cell owns an independent stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
    return Rng{derive_seed(master, index)};
}

/// Uniform on the open interval (0, 1) with 53 random bits.
inline double uniform_open01(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace levdyn
