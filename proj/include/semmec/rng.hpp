#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace semmec {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent stream for (root seed, purpose, index...). Streams with
// different labels or indices are unrelated; the same arguments always give
// the same stream.
inline Rng make_stream(std::uint64_t root, std::string_view label, std::uint64_t i = 0,
                       std::uint64_t j = 0, std::uint64_t k = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = root ^ h;
    for (std::uint64_t x : {i, j, k}) {
        s ^= splitmix64(s) + x;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s) >> 32)};
    return Rng(seq);
}

// Uniform in [0, 1) with 53 random bits; independent of the library's
// distribution implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace semmec
