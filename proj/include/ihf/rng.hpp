#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ihf {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Independent stream for (seed, tag): runs that share a seed but serve
/// different purposes never share random numbers.
inline Rng make_rng(std::uint64_t seed, std::string_view tag = {}) {
    return Rng(splitmix64(splitmix64(seed) ^ hash_tag(tag)));
}

inline bool bernoulli(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

}  // namespace ihf
