#pragma once

// Snapshot observation model: at each check time every individual present in
// a grid cell is detected independently with probability pdet. Moments follow
// from binomial thinning of the latent abundance counts; an equivalent route
// treats "detected in cell l" as its own evolving category.

#include <cstdint>
#include <vector>

#include "ecm.hpp"
#include "trajectory.hpp"

namespace ecmabund {

// Mean and covariance of latent abundance counts Phi over (check time, cell).
inline Moments abundance_moments(double n_individuals, const BrownianAdvection& traj, const std::vector<double>& times,
                                 const Grid& g, bool markov_approx = false) {
    const int K = static_cast<int>(times.size());
    std::vector<std::vector<double>> probs(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) probs[static_cast<std::size_t>(k)] = traj.grid_probs(times[k], g);
    std::vector<GridPairTable> tabs; // upper-triangle (k, kp), k < kp
    tabs.reserve(static_cast<std::size_t>(K) * (K - 1) / 2);
    std::vector<std::vector<int>> idx(static_cast<std::size_t>(K), std::vector<int>(static_cast<std::size_t>(K), -1));
    for (int k = 0; k < K; ++k)
        for (int kp = k + 1; kp < K; ++kp) {
            idx[static_cast<std::size_t>(k)][static_cast<std::size_t>(kp)] = static_cast<int>(tabs.size());
            tabs.push_back(markov_approx ? markov_pair_table(traj, times[k], times[kp], g)
                                         : traj.grid_pair_table(times[k], times[kp], g));
        }
    auto pair_prob = [&](int k, int kp, int l, int lp) {
        if (k < kp) return tabs[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)][static_cast<std::size_t>(kp)])].cell_pair(l, lp);
        return tabs[static_cast<std::size_t>(idx[static_cast<std::size_t>(kp)][static_cast<std::size_t>(k)])].cell_pair(lp, l);
    };
    return ecm_moments(n_individuals, probs, pair_prob);
}

// Detected-count moments by binomial thinning of the abundance moments.
inline Moments snapshot_moments(double n_individuals, double pdet, const BrownianAdvection& traj,
                                const std::vector<double>& times, const Grid& g, bool markov_approx = false) {
    Moments phi = abundance_moments(n_individuals, traj, times, g, markov_approx);
    Moments q;
    q.mean = pdet * phi.mean;
    q.cov = (pdet * pdet) * phi.cov;
    for (int i = 0; i < q.mean.size(); ++i)
        q.cov(i, i) = pdet * (1.0 - pdet) * phi.mean[i] + pdet * pdet * phi.cov(i, i);
    return q;
}

// Full-path probability table over detection categories at one or two check
// times. Categories 0..L-1 are "detected in cell l"; category L is "not
// detected" (outside the grid or missed). Built from the joint location
// probabilities by the per-time thinning recursion; used to cross-check the
// thinning moment formulas against plain evolving-category moments.
inline PathProbabilityTable snapshot_path_probs(double pdet, const BrownianAdvection& traj,
                                                const std::vector<double>& times, const Grid& g) {
    const int L = g.n_cells();
    if (times.size() == 1) {
        const auto mu = traj.grid_probs(times[0], g);
        std::vector<double> pi(static_cast<std::size_t>(L) + 1);
        double in = 0.0;
        for (int l = 0; l < L; ++l) {
            pi[static_cast<std::size_t>(l)] = pdet * mu[static_cast<std::size_t>(l)];
            in += mu[static_cast<std::size_t>(l)];
        }
        pi[static_cast<std::size_t>(L)] = (1.0 - in) + (1.0 - pdet) * in;
        return PathProbabilityTable({L + 1}, std::move(pi));
    }
    if (times.size() != 2)
        throw std::invalid_argument("snapshot_path_probs: only one- and two-time designs have closed joint tables here");
    // pi0: joint location probs over categories {cells, off-grid} at both times
    const auto mu1 = traj.grid_probs(times[0], g);
    const auto mu2 = traj.grid_probs(times[1], g);
    const auto tab = traj.grid_pair_table(times[0], times[1], g);
    const int M = L + 1;
    std::vector<double> pi0(static_cast<std::size_t>(M) * M, 0.0);
    double in1 = 0.0, in2 = 0.0, inin = 0.0;
    for (int l = 0; l < L; ++l) in1 += mu1[static_cast<std::size_t>(l)];
    for (int l = 0; l < L; ++l) in2 += mu2[static_cast<std::size_t>(l)];
    for (int l = 0; l < L; ++l) {
        double row = 0.0;
        for (int lp = 0; lp < L; ++lp) {
            const double p = tab.cell_pair(l, lp);
            pi0[static_cast<std::size_t>(l) * M + lp] = p;
            row += p;
        }
        pi0[static_cast<std::size_t>(l) * M + L] = std::max(0.0, mu1[static_cast<std::size_t>(l)] - row);
        inin += row;
    }
    for (int lp = 0; lp < L; ++lp) {
        double col = 0.0;
        for (int l = 0; l < L; ++l) col += tab.cell_pair(l, lp);
        pi0[static_cast<std::size_t>(L) * M + lp] = std::max(0.0, mu2[static_cast<std::size_t>(lp)] - col);
    }
    pi0[static_cast<std::size_t>(L) * M + L] = std::max(0.0, 1.0 - in1 - in2 + inin);
    // thinning recursion, one check time at a time
    auto thin = [&](std::vector<double> prev, int axis) {
        std::vector<double> out(static_cast<std::size_t>(M) * M, 0.0);
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < M; ++b) {
                const int l = axis == 0 ? a : b;
                const auto at = [&](int v) { return axis == 0 ? prev[static_cast<std::size_t>(v) * M + b] : prev[static_cast<std::size_t>(a) * M + v]; };
                if (l < L) {
                    out[static_cast<std::size_t>(a) * M + b] = pdet * at(l);
                } else {
                    double s = at(L);
                    for (int lk = 0; lk < L; ++lk) s += (1.0 - pdet) * at(lk);
                    out[static_cast<std::size_t>(a) * M + b] = s;
                }
            }
        return out;
    };
    return PathProbabilityTable({M, M}, thin(thin(pi0, 0), 1));
}

// Draw detected counts: counts[k][l] over check times and grid cells.
inline std::vector<std::vector<std::uint64_t>> simulate_snapshot(Rng& rng, std::uint64_t n_individuals, double pdet,
                                                                 const Trajectory& traj, const std::vector<double>& times,
                                                                 const Grid& g) {
    const int K = static_cast<int>(times.size());
    std::vector<std::vector<std::uint64_t>> counts(static_cast<std::size_t>(K),
                                                   std::vector<std::uint64_t>(static_cast<std::size_t>(g.n_cells()), 0));
    for (std::uint64_t i = 0; i < n_individuals; ++i) {
        const auto path = traj.sample_path(rng, times);
        for (int k = 0; k < K; ++k) {
            const int l = g.locate(path[static_cast<std::size_t>(k)].first, path[static_cast<std::size_t>(k)].second);
            if (l >= 0 && (pdet >= 1.0 || rng.uniform() < pdet))
                ++counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
        }
    }
    return counts;
}

} // namespace ecmabund
