// Deterministic randomness helpers. Distributions are hand-rolled on top of
// mt19937_64 so that identical seeds give identical streams regardless of the
// standard library's distribution implementations.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace samn::rng {

using Engine = std::mt19937_64;

// splitmix64; used to derive independent stream seeds from (seed, stream id).
inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed) ^ mix(stream + 0x51ed2701ULL));
}

// Uniform in [0, 1) with 53-bit resolution.
inline double next_double(Engine& eng) {
    return static_cast<double>(eng() >> 11) * (1.0 / 9007199254740992.0);
}

// Uniform in [lo, hi).
inline double uniform(Engine& eng, double lo, double hi) {
    return lo + (hi - lo) * next_double(eng);
}

// Unbiased integer in [0, n) via rejection sampling.
inline std::uint64_t below(Engine& eng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
        v = eng();
    } while (v >= limit);
    return v % n;
}

// Standard normal via Box-Muller.
inline double normal(Engine& eng) {
    double u1 = next_double(eng);
    while (u1 <= 0.0) u1 = next_double(eng);
    const double u2 = next_double(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void shuffle(std::vector<T>& values, Engine& eng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(below(eng, i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace samn::rng
