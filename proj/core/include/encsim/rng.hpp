#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace encsim {

// Seeded PRNG for a single run. The engine is std::mt19937_64 whose output
// sequence is pinned by the standard, so event logs replay bit-identically
// for a fixed seed. Derived draws (uniform ints, gaussians) are implemented
// here instead of with std:: distributions because those are not portable
// across standard libraries.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Unbiased value in [0, bound) via rejection sampling.
    std::uint64_t uniform(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform double in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

    // Box-Muller, one spare cached.
    double gaussian(double sigma) {
        if (sigma <= 0.0) return 0.0;
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sigma;
        }
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * M_PI * u2) * sigma;
    }

    // Signed integral jitter, handy for latency noise.
    std::int64_t gaussian_int(double sigma) {
        return static_cast<std::int64_t>(std::llround(gaussian(sigma)));
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stable mix for deriving independent stream seeds from one run seed
// (splitmix64 finalizer).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace encsim
