#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace quizpipe {

// Deterministic RNG wrapper. std::mt19937_64 has a standard-mandated
// sequence; the double conversions are done by hand so draws are
// reproducible independent of the standard library's distribution code.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(uint64_t seed) : eng(seed) {}

    uint64_t next() { return eng(); }

    // [0, 1)
    double uniform01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller
    double normal(double mean, double stddev) {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

    // [0, n)
    uint64_t below(uint64_t n) { return n ? eng() % n : 0; }
};

// splitmix64: used to derive independent per-item seeds from a base seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace quizpipe
