#pragma once

#include <cstdint>
#include <random>

namespace isokin {

using Rng = std::mt19937_64;

//! SplitMix64 finalizer; decorrelates nearby seeds
constexpr std::uint64_t mix_seed(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

//! Engine for substream `stream` of a base seed; independent of thread layout
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream)
{
    return Rng(mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x51ed27ULL)));
}

inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace isokin
