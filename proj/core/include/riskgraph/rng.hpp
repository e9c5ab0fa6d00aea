#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace riskgraph {

// All randomness in the library flows through these helpers. std::mt19937_64
// has a fully specified output sequence, but the std:: distribution adapters
// do not (their algorithms are implementation-defined), so results would not
// reproduce across standard libraries. The transforms below are pinned.

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent sub-seeds from one
/// master seed and to hash discrete labels into bit strings.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Sub-seed derivation: independent stream `index` of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double u01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * u01(rng);
}

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

/// Standard normal via Box-Muller. One value per call; the second root is
/// discarded so the draw count stays predictable.
inline double normal(Rng& rng) {
    double u1 = u01(rng);
    while (u1 <= 0.0) u1 = u01(rng); // log(0) guard
    const double u2 = u01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

inline double normal(Rng& rng, double mean, double stddev) {
    return mean + stddev * normal(rng);
}

/// Fisher-Yates shuffle using uniform_index (std::shuffle's use of the
/// engine is unspecified).
template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

} // namespace riskgraph
