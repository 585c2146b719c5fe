#pragma once

// Multivariate normal rectangle probabilities by the separation-of-variables
// transformation with a randomized Richtmyer quasi-Monte Carlo rule.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "normal.hpp"
#include "rng.hpp"

namespace ecmabund {

struct MvnResult {
    double prob = 0.0;
    double se = 0.0;
    bool converged = false;
    std::uint64_t points_used = 0;
};

namespace detail {

inline const std::vector<double>& sqrt_primes(std::size_t n) {
    static std::vector<double> cache;
    static const int primes[] = {2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,  59,
                                 61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131, 137, 139,
                                 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229};
    while (cache.size() < n) {
        const std::size_t i = cache.size();
        if (i < std::size(primes))
            cache.push_back(std::sqrt(static_cast<double>(primes[i])));
        else
            cache.push_back(std::sqrt(static_cast<double>(2 * i * i + 3 * i + 7))); // spill-over irrationals
    }
    return cache;
}

// One randomized-QMC estimate of the SOV integrand average over n points.
inline double mvn_sov_batch(const Eigen::MatrixXd& chol, const std::vector<double>& lo, const std::vector<double>& hi,
                            std::uint64_t n, Rng& rng) {
    const int d = static_cast<int>(lo.size());
    const auto& q = sqrt_primes(static_cast<std::size_t>(d > 1 ? d - 1 : 1));
    std::vector<double> shift(static_cast<std::size_t>(d > 1 ? d - 1 : 1));
    for (double& s : shift) s = rng.uniform();
    std::vector<double> y(static_cast<std::size_t>(d));
    double total = 0.0;
    for (std::uint64_t j = 1; j <= n; ++j) {
        double prob = 1.0;
        for (int i = 0; i < d; ++i) {
            double off = 0.0;
            for (int k = 0; k < i; ++k) off += chol(i, k) * y[static_cast<std::size_t>(k)];
            const double cii = chol(i, i);
            const double di = lo[static_cast<std::size_t>(i)] == -kInf ? 0.0 : norm_cdf((lo[static_cast<std::size_t>(i)] - off) / cii);
            const double ei = hi[static_cast<std::size_t>(i)] == kInf ? 1.0 : norm_cdf((hi[static_cast<std::size_t>(i)] - off) / cii);
            const double fi = std::max(0.0, ei - di);
            prob *= fi;
            if (prob <= 0.0) break;
            if (i < d - 1) {
                double w = static_cast<double>(j) * q[static_cast<std::size_t>(i)] + shift[static_cast<std::size_t>(i)];
                w -= std::floor(w);
                // tent transform improves the lattice rule's uniformity
                w = 1.0 - std::fabs(2.0 * w - 1.0);
                y[static_cast<std::size_t>(i)] = norm_ppf(di + w * fi);
            }
        }
        total += prob;
    }
    return total / static_cast<double>(n);
}

} // namespace detail

// P(lower <= X <= upper) for X ~ N(mean, cov). Deterministic given seed.
// Adaptive budget: starts at 2^13 points, doubles until the relative standard
// error is at most rel_tol or the 2^20-point cap is hit.
inline MvnResult mvn_rect(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper, std::uint64_t seed, double rel_tol = 1e-3) {
    const int d = static_cast<int>(mean.size());
    MvnResult res;
    if (d == 0) {
        res.prob = 1.0;
        res.converged = true;
        return res;
    }
    Eigen::MatrixXd sig = cov;
    Eigen::LLT<Eigen::MatrixXd> llt(sig);
    double jitter = 0.0;
    while (llt.info() != Eigen::Success) {
        jitter = jitter == 0.0 ? 1e-10 * sig.diagonal().maxCoeff() : jitter * 10.0;
        if (jitter > sig.diagonal().maxCoeff()) return res; // hopeless; flagged non-converged
        sig = cov + jitter * Eigen::MatrixXd::Identity(d, d);
        llt.compute(sig);
    }
    const Eigen::MatrixXd chol = llt.matrixL();
    std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        lo[static_cast<std::size_t>(i)] = std::isinf(lower[i]) ? -kInf : lower[i] - mean[i];
        hi[static_cast<std::size_t>(i)] = std::isinf(upper[i]) ? kInf : upper[i] - mean[i];
    }
    constexpr int kShifts = 8;
    Rng rng(derive_seed(seed, 0x6d766e)); // stream tag for this integrator
    std::uint64_t per_shift = (1ULL << 13) / kShifts;
    std::vector<double> est(kShifts, 0.0);
    std::uint64_t used_per_shift = 0;
    while (true) {
        for (int s = 0; s < kShifts; ++s) {
            const double batch = detail::mvn_sov_batch(chol, lo, hi, per_shift, rng);
            // running average over all points seen by this shift
            est[static_cast<std::size_t>(s)] =
                (est[static_cast<std::size_t>(s)] * static_cast<double>(used_per_shift) + batch * static_cast<double>(per_shift)) /
                static_cast<double>(used_per_shift + per_shift);
        }
        used_per_shift += per_shift;
        double m = 0.0;
        for (double e : est) m += e;
        m /= kShifts;
        double v = 0.0;
        for (double e : est) v += (e - m) * (e - m);
        v /= kShifts * (kShifts - 1);
        res.prob = m;
        res.se = std::sqrt(v);
        res.points_used = used_per_shift * kShifts;
        if (res.se <= rel_tol * std::max(m, 1e-300)) {
            res.converged = true;
            return res;
        }
        if (res.points_used >= (1ULL << 20)) return res; // cap reached, flagged
        per_shift = used_per_shift; // doubles the total budget
    }
}

} // namespace ecmabund
