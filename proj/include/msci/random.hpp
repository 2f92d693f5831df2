#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace msci {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for an independent stream identified by a path of integers, e.g.
/// (seed, generation, slot). Same path, same stream, on every run.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t p : path) h = mix64(h ^ mix64(p));
    return h;
}

inline Rng derive_rng(std::initializer_list<std::uint64_t> path) { return Rng{derive_seed(path)}; }

/// Uniform double in [0, 1) built from the top 53 bits. Unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double unit_double(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n). Lemire's multiply-shift; bias is below 2^-64 * n.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

inline bool coin_flip(Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace msci
