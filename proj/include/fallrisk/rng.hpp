#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fallrisk {

// Draw helpers built only on the fully-specified mt19937_64 stream, so
// every artifact is byte-reproducible across standard libraries (the
// std <random> distributions are implementation-defined).

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Substream seed for entity `index` under a run seed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x51ed2701ULL));
}

inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection.
inline std::uint64_t bounded_uint(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound < 2) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_uint(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

inline double normal_draw(std::mt19937_64& rng) {
    // Box-Muller; one value per call keeps the stream layout simple.
    double u1 = unit_double(rng);
    double u2 = unit_double(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline int poisson_draw(std::mt19937_64& rng, double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        // Knuth multiplication
        double limit = std::exp(-mean);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= unit_double(rng);
        } while (p > limit);
        return k - 1;
    }
    // normal approximation for large means, adequate for simulation inputs
    double v = mean + std::sqrt(mean) * normal_draw(rng);
    return v < 0.0 ? 0 : static_cast<int>(v + 0.5);
}

inline int geometric_draw(std::mt19937_64& rng, double p) {
    // number of failures before the first success
    double u = unit_double(rng);
    if (u <= 0.0) u = 0x1.0p-53;
    if (p >= 1.0) return 0;
    return static_cast<int>(std::floor(std::log(1.0 - u) / std::log(1.0 - p)));
}

}  // namespace fallrisk
