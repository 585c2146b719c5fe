#pragma once

// Deterministic random number utilities. All sampling goes through the
// inverse-CDF for normals so results are reproducible across platforms.

#include <cstdint>
#include <random>
#include <vector>

#include "normal.hpp"

namespace ecmabund {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive an independent stream seed from a master seed and stream indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= splitmix64(a += 0x632be59bd9b4e019ULL);
    (void)splitmix64(s);
    s ^= splitmix64(b += 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        // 53-bit uniform in (0, 1)
        return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double normal() { return norm_ppf(uniform()); }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Exact inversion-by-multiplication Poisson; chunked so large means stay exact.
    std::uint64_t poisson(double lambda) {
        std::uint64_t n = 0;
        while (lambda > 500.0) {
            n += poisson_small(500.0);
            lambda -= 500.0;
        }
        return n + poisson_small(lambda);
    }

    std::uint64_t binomial(std::uint64_t n, double p) {
        if (p <= 0.0) return 0;
        if (p >= 1.0) return n;
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n; ++i)
            if (uniform() < p) ++k;
        return k;
    }

    // Sample an index from a cumulative distribution (last entry = total mass).
    std::size_t sample_cdf(const std::vector<double>& cdf) {
        const double u = uniform() * cdf.back();
        std::size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cdf[mid] < u)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::uint64_t poisson_small(double lambda) {
        if (lambda <= 0.0) return 0;
        const double L = std::exp(-lambda);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > L);
        return k - 1;
    }

    std::mt19937_64 gen_;
};

} // namespace ecmabund
