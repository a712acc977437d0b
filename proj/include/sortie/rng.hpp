#pragma once

#include <cstdint>
#include <random>

namespace sortie {

using Rng = std::mt19937_64;

// SplitMix64 step; good enough to decorrelate per-battle streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic per-battle seed derived from the campaign master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index));
}

} // namespace sortie
