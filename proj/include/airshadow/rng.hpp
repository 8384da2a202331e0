#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "airshadow/core.hpp"

namespace airshadow {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Named substream of a master seed ("scenario", "noise", "split", ...).
inline std::uint64_t substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a64(name)) + index);
}

inline Rng make_rng(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    return Rng(substream(seed, name, index));
}

} // namespace airshadow
