#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace seqlab {

/// Derives an independent stream seed from a master seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random source. Every draw is defined purely in terms of the
/// mt19937_64 bit stream; std::uniform_*_distribution is implementation
/// defined and deliberately avoided, so seeded results are reproducible
/// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1), endpoints excluded.
    double open01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); rejection sampling keeps the draw unbiased.
    int below(int n) {
        const auto un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<int>(x % un);
    }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        constexpr double two_pi = 6.283185307179586476925287;
        const double u = open01();
        const double v = open01();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(two_pi * v);
        have_spare_ = true;
        return r * std::cos(two_pi * v);
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(below(static_cast<int>(i)))]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace seqlab
