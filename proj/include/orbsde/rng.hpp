#pragma once

#include <cmath>
#include <cstdint>

namespace orbsde {

// Counter-based random numbers: every draw is a pure function of
// (seed, path, interval, coordinate).  Ensembles sharing a seed across
// different grid sizes therefore share their low-index draws, which is what
// the convergence harness relies on for common random numbers.

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// uniform in (0,1]
inline double key_to_unit(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

// standard normal draw for (seed, path, interval, coordinate), Box-Muller
inline double normal_draw(std::uint64_t seed, std::uint64_t path, std::uint64_t interval,
                          std::uint64_t coord) {
    const std::uint64_t k = counter_key(seed, path, interval, coord);
    const double u1 = key_to_unit(k);
    const double u2 = key_to_unit(mix64(k ^ 0xd1342543de82ef95ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// uniform in [0,1) keyed draw, for tests and random strategies
inline double uniform_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) {
    return static_cast<double>(counter_key(seed, a, b, c) >> 11) * 0x1.0p-53;
}

}  // namespace orbsde
