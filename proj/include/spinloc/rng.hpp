#pragma once

#include <cstdint>
#include <random>

namespace spinloc {

// splitmix64 finalizer, used as the stream-splitting mixer: the stream for
// chain k under global seed s is seeded with mix64(s ^ mix64(k + 1)).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t chain_seed(std::uint64_t global_seed, std::uint64_t chain_index) {
    return mix64(global_seed ^ mix64(chain_index + 1));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

inline int uniform_index(Rng& rng, int n) {
    return std::uniform_int_distribution<int>{0, n - 1}(rng);
}

inline double normal01(Rng& rng) {
    return std::normal_distribution<double>{0.0, 1.0}(rng);
}

} // namespace spinloc
