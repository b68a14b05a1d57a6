#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sevpr {

/// Seeded RNG with hand-rolled draw helpers so that sampled sequences are
/// reproducible across standard-library implementations. std::mt19937_64 has
/// a fully specified output sequence; the distributions in <random> do not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n), unbiased via rejection. n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call, no caching, so the
    /// consumed stream length is predictable).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Poisson sample by inversion of exponential gaps. Large means are split
    /// in halves so exp(-mean) never underflows.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 60.0) {
            const double half = mean * 0.5;
            return poisson(half) + poisson(mean - half);
        }
        const double threshold = std::exp(-mean);
        std::uint64_t count = 0;
        double product = uniform();
        while (product > threshold) {
            ++count;
            product *= uniform();
        }
        return count;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace sevpr
