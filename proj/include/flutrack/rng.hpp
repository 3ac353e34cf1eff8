#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace flutrack {

// All randomness in the project flows through these helpers. They are built
// on the raw mt19937_64 output stream, which the standard pins down exactly,
// so sequences are reproducible across platforms and standard libraries.
// (std::normal_distribution and friends leave the algorithm unspecified and
// would break the byte-identical-rerun contract.)

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic per-unit child seed, for independent substreams in parallel
// work (draw i uses substream derive_seed(seed, i) regardless of scheduling).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; consumes exactly two uniforms per call.
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Knuth multiplication method, chunked so exp(-lambda) never underflows.
    std::int64_t poisson(double lambda) {
        if (lambda < 0.0) throw std::invalid_argument("poisson: lambda < 0");
        std::int64_t total = 0;
        while (lambda > 500.0) {
            total += poisson_small(500.0);
            lambda -= 500.0;
        }
        return total + poisson_small(lambda);
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free scaled draw; bias is negligible for n << 2^53 and
        // the result stays deterministic.
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::int64_t poisson_small(double lambda) {
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        std::int64_t k = -1;
        do {
            ++k;
            prod *= uniform();
        } while (prod > limit);
        return k;
    }

    std::mt19937_64 engine_;
};

} // namespace flutrack
