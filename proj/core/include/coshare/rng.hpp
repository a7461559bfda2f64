#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace coshare {

/// Seeded deterministic RNG. All derived draws (bounded ints, doubles,
/// distribution samplers, shuffles) are implemented on top of the raw
/// mt19937_64 output stream, so a given seed produces the same sequence
/// on every platform. Never use std::*_distribution here: their output
/// is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Unbiased draw from [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t min = (-n) % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= min) return r % n;
        }
    }

    /// Inclusive integer range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * unit(); }

    /// Standard normal via Box-Muller. Draws two uniforms per call.
    double normal() {
        double u1 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

    /// Knuth's product method; fine for the small rates used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= unit();
        } while (p > limit);
        return k - 1;
    }

    /// Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    /// Sample k distinct indices from [0, n) in selection order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

    /// Independent substream with a seed derived from (seed, stream).
    Rng fork(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace coshare
