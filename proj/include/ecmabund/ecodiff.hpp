#pragma once

// EcoDiff baseline: independent Poisson counts per (time, cell) with
// intensity N p times the advection-diffusion occupancy probability. The
// PDE solution for a point release is the Gaussian kernel, so the intensity
// coincides with the snapshot mean.

#include <cstdint>
#include <vector>

#include "rng.hpp"
#include "trajectory.hpp"

namespace ecmabund {

inline constexpr double kPoissonEps = 1e-24;

inline double ecodiff_intensity(double n_individuals, double pdet, const BrownianAdvection& traj, double t, const Rect& a) {
    return n_individuals * pdet * traj.rect_prob(t, a);
}

inline std::vector<std::vector<double>> ecodiff_intensities(double n_individuals, double pdet,
                                                            const BrownianAdvection& traj,
                                                            const std::vector<double>& times, const Grid& g) {
    std::vector<std::vector<double>> lam(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        lam[k] = traj.grid_probs(times[k], g);
        for (double& v : lam[k]) v *= n_individuals * pdet;
    }
    return lam;
}

inline std::vector<std::vector<std::uint64_t>> simulate_ecodiff(Rng& rng, double n_individuals, double pdet,
                                                                const BrownianAdvection& traj,
                                                                const std::vector<double>& times, const Grid& g) {
    const auto lam = ecodiff_intensities(n_individuals, pdet, traj, times, g);
    std::vector<std::vector<std::uint64_t>> counts(lam.size());
    for (std::size_t k = 0; k < lam.size(); ++k) {
        counts[k].resize(lam[k].size());
        for (std::size_t l = 0; l < lam[k].size(); ++l) counts[k][l] = rng.poisson(lam[k][l]);
    }
    return counts;
}

// Sum of Poisson log-pmfs with the small rate shift guarding log(0).
inline double ecodiff_loglik(const std::vector<std::vector<double>>& lam,
                             const std::vector<std::vector<std::uint64_t>>& counts) {
    double ll = 0.0;
    for (std::size_t k = 0; k < lam.size(); ++k)
        for (std::size_t l = 0; l < lam[k].size(); ++l) {
            const double rate = lam[k][l] + kPoissonEps;
            const double x = static_cast<double>(counts[k][l]);
            ll += x * std::log(rate) - rate - std::lgamma(x + 1.0);
        }
    return ll;
}

} // namespace ecmabund
