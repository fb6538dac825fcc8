#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so replicates and matrix entries can be generated in any
// order, on any thread, with identical results.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace bandclt::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
inline Counter philox4x32(Counter ctr, Key key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent stream families derived from one master seed.
enum class Domain : std::uint64_t {
    MatrixEntries = 1,
    HaarGaussian = 2,
    SyntheticNormal = 3,
    UniformSums = 4,
};

inline Key derive_key(std::uint64_t seed, Domain domain) {
    const std::uint64_t mixed =
        splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(domain)));
    return {static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32)};
}

/// Maps 53 random bits to the open interval (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

struct UniformPair {
    double first;
    double second;
};

/// Two uniforms addressed by a 128-bit coordinate (a, b, c).
inline UniformPair uniform_pair(const Key& key, std::uint32_t a, std::uint32_t b,
                                std::uint64_t c) {
    const Counter out = philox4x32(
        {a, b, static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)}, key);
    return {to_open_unit(out[0], out[1]), to_open_unit(out[2], out[3])};
}

/// Box-Muller on one uniform pair, cosine branch only.
inline double standard_normal(UniformPair u) {
    return std::sqrt(-2.0 * std::log(u.first)) *
           std::cos(2.0 * std::numbers::pi * u.second);
}

}  // namespace bandclt::rng
