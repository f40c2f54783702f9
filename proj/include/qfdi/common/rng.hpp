#pragma once
// All randomness flows from one top-level seed through named sub-streams so
// that every pipeline stage is reproducible independently of the others.

#include <cstdint>
#include <random>
#include <string_view>

namespace qfdi::rng {

// FNV-1a, used for stream derivation and for content hashing of artifacts.
inline std::uint64_t fnv1a(std::string_view s,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic engine for the named sub-stream of a master seed. Extra
// indices (epoch, rollout id, ...) fold in as additional words.
inline std::mt19937_64 stream(std::uint64_t seed, std::string_view name,
                              std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = fnv1a(name) ^ mix64(seed);
    h = mix64(h ^ mix64(a + 0x517cc1b727220a95ull));
    h = mix64(h ^ mix64(b + 0x2545f4914f6cdd1dull));
    return std::mt19937_64(h);
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    // 53-bit mantissa division; avoids distribution implementation drift.
    const double u = static_cast<double>(g() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

inline double normal(std::mt19937_64& g) {
    // Box-Muller on explicit uniforms, deterministic across libstdc++ versions.
    double u1 = uniform(g, 0.0, 1.0);
    while (u1 <= 0.0) u1 = uniform(g, 0.0, 1.0);
    const double u2 = uniform(g, 0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace qfdi::rng
