#pragma once

// Deterministic seed derivation. Every stochastic component owns a
// std::mt19937_64 seeded from (parent seed, stream id) through these mixers.

#include <cstdint>
#include <random>
#include <string_view>

namespace evq {

using Rng = std::mt19937_64;

/// splitmix64 finaliser.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
    return mix64(mix64(parent) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

/// 64-bit FNV-1a.
inline constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL) noexcept {
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline constexpr std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h) noexcept {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xFFu;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t seed_for_key(std::uint64_t master, std::string_view key) noexcept {
    return derive_seed(master, fnv1a(key));
}

}  // namespace evq
