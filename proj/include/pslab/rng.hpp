#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "pslab/lattice.hpp"

namespace pslab {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

// Stateless stream keyed by (seed, beta, site); draw k of that stream.
inline std::uint64_t keyed_bits(std::uint64_t seed, int beta, const Site& s, std::uint64_t k = 0) {
    std::uint64_t h = mix(seed, static_cast<std::uint64_t>(beta) + 0x51ed27);
    h = mix(h, s.key());
    return mix(h, k);
}

// Uniform in (0,1), never exactly 0.
inline double to_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

inline double keyed_uniform(std::uint64_t seed, int beta, const Site& s, std::uint64_t k = 0) {
    return to_unit(keyed_bits(seed, beta, s, k));
}

inline double keyed_normal(std::uint64_t seed, int beta, const Site& s) {
    double u1 = keyed_uniform(seed, beta, s, 0), u2 = keyed_uniform(seed, beta, s, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return mix(seed, index + 0x7f4a7c15ULL); }

}  // namespace pslab
