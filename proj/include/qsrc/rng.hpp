#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qsrc {

// Seed contract: a run is identified by one 64-bit seed; Monte Carlo trial i
// draws from the substream derived as splitmix64(seed, i). Substreams are
// independent of worker count, so parallel runs reproduce bit-identically.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(trial + 1)));
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; fixed transform instead of std::normal_distribution, whose
// output sequence is implementation-defined.
struct GaussianPair {
    double z0;
    double z1;
};

inline GaussianPair gaussian_pair(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    // shift u1 away from 0 so the log is finite
    double r = std::sqrt(-2.0 * std::log(u1 + 0x1.0p-54));
    double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

} // namespace qsrc
