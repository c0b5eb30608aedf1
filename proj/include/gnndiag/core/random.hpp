#pragma once

// Deterministic random streams.
//
// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not, so every conversion from raw 64-bit words to
// uniforms, indices and normals is done here.  Anything that must be
// reproducible bit-for-bit draws through these helpers.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace gnndiag {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Labeled sub-seed, e.g. derive_seed(seed, "train").
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) noexcept {
    return splitmix64(base ^ splitmix64(fnv1a(label)));
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Index in [0, n) by multiply-shift on one draw.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// Box-Muller, two draws per call, no cached second deviate.
inline double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <class It>
void shuffle(It first, It last, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_index(rng, i);
        std::iter_swap(first + (i - 1), first + j);
    }
}

} // namespace gnndiag
