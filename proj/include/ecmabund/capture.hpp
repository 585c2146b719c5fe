#pragma once

// Capture model with one release time. An individual roaming a capture
// domain D_c is trapped at a random time whose density solves a Volterra
// integral equation of the second kind; trapped individuals are released at
// time tL and may be captured a second time. This header has the Volterra
// solver, the recapture conditionals, exact count moments, and a
// discrete-time simulator that shares the solver's Riemann discretization
// (right-endpoint rule, so moments and simulator agree up to Monte Carlo
// error, not just up to quadrature).

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ecm.hpp"
#include "snapshot.hpp"
#include "trajectory.hpp"

namespace ecmabund {

// g1(t) = P(free individual in D_c at t); g2(t,u) = P(in D_c at both t and u).
struct CaptureKernel {
    std::function<double(double)> g1;
    std::function<double(double, double)> g2;
};

struct VolterraSolution {
    double t0 = 0, dt = 0;
    std::vector<double> times; // t_1 .. t_n (right endpoints; t_0 excluded)
    std::vector<double> f;     // capture-time density at grid points
    std::vector<double> phi;   // f / g1
    std::vector<double> g1;

    int index_of(double t) const {
        const double k = (t - t0) / dt;
        const int i = static_cast<int>(std::lround(k)) - 1;
        if (i < 0 || i >= static_cast<int>(times.size()) || std::fabs(times[static_cast<std::size_t>(i)] - t) > 1e-9 * std::max(1.0, std::fabs(t)))
            throw std::invalid_argument("VolterraSolution: time not on grid");
        return i;
    }
};

inline bool check_alpha_validity(double alpha, double t0, double tH, double* margin = nullptr) {
    const double m = 1.0 - alpha * (tH - t0);
    if (margin) *margin = m;
    return m > 0.0;
}

// Right-endpoint Riemann discretization of
//   f(t) = a g1(t) - a \int_{t0}^{t} [g2(t,u)/g1(u)] f(u) du,
// solved by forward substitution. Since g2(t,t) = g1(t) the diagonal
// coefficient is 1 + a dt.
inline VolterraSolution solve_volterra(const CaptureKernel& kernel, double alpha, double t0, double tH, double dt) {
    if (dt <= 0.0 || tH <= t0) throw std::invalid_argument("solve_volterra: bad grid");
    const int n = static_cast<int>(std::lround((tH - t0) / dt));
    if (std::fabs(t0 + n * dt - tH) > 1e-9 * std::max(1.0, std::fabs(tH)))
        throw std::invalid_argument("solve_volterra: (tH - t0)/dt not integral");
    VolterraSolution sol;
    sol.t0 = t0;
    sol.dt = dt;
    sol.times.resize(static_cast<std::size_t>(n));
    sol.f.resize(static_cast<std::size_t>(n));
    sol.phi.resize(static_cast<std::size_t>(n));
    sol.g1.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) sol.times[static_cast<std::size_t>(k)] = t0 + (k + 1) * dt;
    for (int k = 0; k < n; ++k) {
        const double tk = sol.times[static_cast<std::size_t>(k)];
        const double g1k = kernel.g1(tk);
        if (!(g1k > 0.0) || !std::isfinite(g1k))
            throw std::domain_error("solve_volterra: g1 must be finite and positive on the grid");
        sol.g1[static_cast<std::size_t>(k)] = g1k;
        double acc = 0.0;
        for (int j = 0; j < k; ++j)
            acc += kernel.g2(tk, sol.times[static_cast<std::size_t>(j)]) / sol.g1[static_cast<std::size_t>(j)] *
                   sol.f[static_cast<std::size_t>(j)];
        const double fk = (alpha * g1k - alpha * dt * acc) / (1.0 + alpha * dt);
        sol.f[static_cast<std::size_t>(k)] = fk;
        sol.phi[static_cast<std::size_t>(k)] = fk / g1k;
    }
    return sol;
}

// Density of the hypothetical second-capture time given first capture at
// grid time index iu: f(v|u) = a [g2(v,u)/g1(u)] phi(v)/phi(u), v > u.
// Returned over all grid indices (zero for j <= iu).
inline std::vector<double> second_capture_density(const VolterraSolution& sol, const CaptureKernel& kernel, double alpha,
                                                  int iu) {
    const int n = static_cast<int>(sol.times.size());
    if (iu < 0 || iu >= n) throw std::invalid_argument("second_capture_density: bad index");
    const double u = sol.times[static_cast<std::size_t>(iu)];
    const double phu = sol.phi[static_cast<std::size_t>(iu)];
    if (!(phu > 0.0)) throw std::domain_error("second_capture_density: phi(u) = 0");
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    for (int j = iu + 1; j < n; ++j) {
        const double v = sol.times[static_cast<std::size_t>(j)];
        d[static_cast<std::size_t>(j)] = alpha * kernel.g2(v, u) / sol.g1[static_cast<std::size_t>(iu)] *
                                         sol.phi[static_cast<std::size_t>(j)] / phu;
    }
    return d;
}

// Analytic special cases of the capture-time density.
inline CaptureKernel full_space_kernel() {
    return {[](double) { return 1.0; }, [](double, double) { return 1.0; }};
}
// Individual escaping from the origin with standard Gaussian velocity in
// dimension d; capture domain = unit ball. Being inside at the later time
// implies being inside at the earlier one.
inline CaptureKernel escaping_kernel(int dim, double t0) {
    auto g1 = [dim, t0](double t) {
        const double e = t - t0;
        return e <= 0.0 ? 1.0 : chi2_cdf(1.0 / (e * e), dim);
    };
    return {g1, [g1](double t, double u) { return g1(std::max(t, u)); }};
}

struct CaptureConfig {
    double alpha = 0.1;
    double t0 = 0.0, tL = 0.5, tH = 1.5;
    double dt = 1.0 / 60.0;
    Grid grid;                       // cells partition D_c (the grid extent)
    std::vector<double> check_times; // observation times, on the dt-grid
    bool markov_approx = false;      // center-point shortcut for pair tables

    void validate() const {
        if (!(t0 < tL && tL < tH)) throw std::invalid_argument("CaptureConfig: need t0 < tL < tH");
        auto on_grid = [&](double t) {
            const double k = (t - t0) / dt;
            return std::fabs(k - std::lround(k)) < 1e-9;
        };
        if (!check_alpha_validity(alpha, t0, tH))
            throw std::invalid_argument("CaptureConfig: alpha (tH - t0) must be < 1");
        if (!on_grid(tL)) throw std::invalid_argument("CaptureConfig: tL not on dt-grid");
        if (!on_grid(tH)) throw std::invalid_argument("CaptureConfig: tH not on dt-grid");
        for (double t : check_times)
            if (!on_grid(t) || t <= t0 || t > tH) throw std::invalid_argument("CaptureConfig: check time off grid");
    }
};

struct CaptureRecord {
    int first_index = -1;  // grid index of T^(1), -1 if never captured
    int second_index = -1; // grid index of the actual second-capture time
    int first_cell = -1;
    int second_cell = -1;
};

// Everything derived from (trajectory, config) that both the moment formulas
// and the simulator need: the Volterra solution, one-time cell probabilities
// on the grid, and joint cell tables for pairs (u <= tL, u < v <= u + tH-tL).
class CaptureModel {
  public:
    CaptureModel(const BrownianAdvection& traj, const CaptureConfig& cfg) : traj_(traj), cfg_(cfg) {
        cfg_.validate();
        const Rect dom{cfg_.grid.xmin, cfg_.grid.xmax, cfg_.grid.ymin, cfg_.grid.ymax};
        CaptureKernel kernel{[&](double t) { return traj_.rect_prob(t, dom); },
                             [&](double t, double u) { return traj_.pair_rect_prob(t, dom, u, dom); }};
        sol_ = solve_volterra(kernel, cfg_.alpha, cfg_.t0, cfg_.tH, cfg_.dt);
        n_ = static_cast<int>(sol_.times.size());
        iL_ = static_cast<int>(std::lround((cfg_.tL - cfg_.t0) / cfg_.dt)) - 1; // index of tL on the grid
        h_ = static_cast<int>(std::lround((cfg_.tH - cfg_.tL) / cfg_.dt));      // window length in steps
        const int L = cfg_.grid.n_cells();
        cell_probs_.resize(static_cast<std::size_t>(n_));
        for (int k = 0; k < n_; ++k) cell_probs_[static_cast<std::size_t>(k)] = traj_.grid_probs(sol_.times[static_cast<std::size_t>(k)], cfg_.grid);
        // pair tables for outer index iu in [0, iL], inner iv in (iu, iu+h]
        tables_.resize(static_cast<std::size_t>(iL_ + 1) * static_cast<std::size_t>(h_));
        for (int iu = 0; iu <= iL_; ++iu)
            for (int s = 1; s <= h_; ++s) {
                const int iv = iu + s;
                if (iv >= n_) break;
                const double u = sol_.times[static_cast<std::size_t>(iu)], v = sol_.times[static_cast<std::size_t>(iv)];
                table_at(iu, iv) = cfg_.markov_approx ? markov_pair_table(traj_, u, v, cfg_.grid)
                                                      : traj_.grid_pair_table(u, v, cfg_.grid);
            }
        // retained-cell weights for a first capture at iu <= tL with no
        // second capture inside the horizon window
        once_weights_.assign(static_cast<std::size_t>(iL_ + 1), std::vector<double>(static_cast<std::size_t>(L), 0.0));
        max_clamp_ = 0.0;
        for (int iu = 0; iu <= iL_; ++iu) {
            auto& w = once_weights_[static_cast<std::size_t>(iu)];
            for (int l = 0; l < L; ++l) w[static_cast<std::size_t>(l)] = cell_probs_[static_cast<std::size_t>(iu)][static_cast<std::size_t>(l)];
            const double phu = sol_.phi[static_cast<std::size_t>(iu)];
            for (int s = 1; s <= h_; ++s) {
                const int iv = iu + s;
                if (iv >= n_) break;
                const GridPairTable& tab = table_at(iu, iv);
                const double c = cfg_.alpha / phu * sol_.phi[static_cast<std::size_t>(iv)] * cfg_.dt;
                for (int l = 0; l < L; ++l) w[static_cast<std::size_t>(l)] -= c * tab.pair_any(l);
            }
            for (double& x : w)
                if (x < 0.0) {
                    max_clamp_ = std::max(max_clamp_, -x);
                    x = 0.0;
                }
        }
    }

    const VolterraSolution& solution() const { return sol_; }
    const CaptureConfig& config() const { return cfg_; }
    double max_clamp() const { return max_clamp_; }

    // --- Moment formulas (one release time) -------------------------------

    // E{Q_t(A_l)} / N over (check time, cell), plus covariance of the counts.
    Moments moments(double n_individuals) const {
        const int K = static_cast<int>(cfg_.check_times.size());
        const int L = cfg_.grid.n_cells();
        const int d = K * L;
        std::vector<int> it(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) it[static_cast<std::size_t>(k)] = sol_.index_of(cfg_.check_times[static_cast<std::size_t>(k)]);
        const int iLg = iL_;
        // per-time per-cell mean probabilities
        Eigen::VectorXd q(d);
        for (int k = 0; k < K; ++k) {
            const double t = cfg_.check_times[static_cast<std::size_t>(k)];
            for (int l = 0; l < L; ++l) q[k * L + l] = mean_prob(t, it[static_cast<std::size_t>(k)], iLg, l);
        }
        Moments m;
        m.mean = n_individuals * q;
        m.cov.resize(d, d);
        for (int k = 0; k < K; ++k)
            for (int kp = k; kp < K; ++kp) {
                const double t = cfg_.check_times[static_cast<std::size_t>(k)], s = cfg_.check_times[static_cast<std::size_t>(kp)];
                const int i1 = it[static_cast<std::size_t>(k)], i2 = it[static_cast<std::size_t>(kp)];
                // joint probability table over (l, lp) for this time pair
                Eigen::MatrixXd joint = joint_prob(t, i1, s, i2, iLg, L);
                for (int l = 0; l < L; ++l)
                    for (int lp = 0; lp < L; ++lp) {
                        const int i = k * L + l, j = kp * L + lp;
                        const double c = n_individuals * (joint(l, lp) - q[i] * q[j]);
                        m.cov(i, j) = c;
                        m.cov(j, i) = c;
                    }
            }
        return m;
    }

    // --- Simulation --------------------------------------------------------

    // One replication: counts[k][l] of retained individuals, plus records.
    std::vector<std::vector<std::uint64_t>> simulate(Rng& rng, std::uint64_t n_individuals,
                                                     std::vector<CaptureRecord>* records = nullptr) {
        const int K = static_cast<int>(cfg_.check_times.size());
        const int L = cfg_.grid.n_cells();
        std::vector<int> it(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) it[static_cast<std::size_t>(k)] = sol_.index_of(cfg_.check_times[static_cast<std::size_t>(k)]);
        ensure_first_cdf();
        std::vector<std::vector<std::uint64_t>> counts(static_cast<std::size_t>(K),
                                                       std::vector<std::uint64_t>(static_cast<std::size_t>(L), 0));
        for (std::uint64_t ind = 0; ind < n_individuals; ++ind) {
            CaptureRecord rec;
            const std::size_t pick = rng.sample_cdf(first_cdf_);
            if (pick < static_cast<std::size_t>(n_)) {
                const int iu = static_cast<int>(pick);
                rec.first_index = iu;
                if (iu > iL_) {
                    rec.first_cell = sample_free_cell(rng, iu);
                } else {
                    const auto& c2 = second_cdf(iu);
                    const std::size_t pick2 = rng.sample_cdf(c2);
                    if (pick2 < static_cast<std::size_t>(h_)) {
                        const int iv = iu + 1 + static_cast<int>(pick2);
                        // actual second-capture time index: v - u + tL on the grid
                        rec.second_index = iv - (iu + 1) + iL_ + 1;
                        sample_pair_cells(rng, iu, iv, rec.first_cell, rec.second_cell);
                    } else {
                        rec.first_cell = sample_once_cell(rng, iu);
                    }
                }
            }
            for (int k = 0; k < K; ++k) {
                const int i = it[static_cast<std::size_t>(k)];
                int cell = -1;
                if (i <= iL_) {
                    if (rec.first_index >= 0 && rec.first_index <= i) cell = rec.first_cell;
                } else {
                    if (rec.first_index > iL_ && rec.first_index <= i)
                        cell = rec.first_cell;
                    else if (rec.second_index >= 0 && rec.second_index <= i)
                        cell = rec.second_cell;
                }
                if (cell >= 0) ++counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(cell)];
            }
            if (records) records->push_back(rec);
        }
        return counts;
    }

  private:
    GridPairTable& table_at(int iu, int iv) {
        return tables_[static_cast<std::size_t>(iu) * static_cast<std::size_t>(h_) + static_cast<std::size_t>(iv - iu - 1)];
    }
    const GridPairTable& table_at(int iu, int iv) const {
        return tables_[static_cast<std::size_t>(iu) * static_cast<std::size_t>(h_) + static_cast<std::size_t>(iv - iu - 1)];
    }

    // P(individual retained in cell l at check time t) -- Riemann sums with
    // the same right-endpoint rule as the Volterra solve.
    double mean_prob(double t, int itx, int iLg, int l) const {
        const double dt = cfg_.dt;
        double acc = 0.0;
        if (t <= cfg_.tL) {
            for (int j = 0; j <= itx; ++j)
                acc += cell_probs_[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] * sol_.phi[static_cast<std::size_t>(j)] * dt;
            return acc;
        }
        for (int j = iLg + 1; j <= itx; ++j)
            acc += cell_probs_[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] * sol_.phi[static_cast<std::size_t>(j)] * dt;
        // second captures: hypothetical v in (u, u + t - tL]
        const int win = itx - iLg;
        for (int iu = 0; iu <= iLg; ++iu)
            for (int s = 1; s <= win; ++s) {
                const int iv = iu + s;
                if (iv >= n_) break;
                acc += cfg_.alpha * table_at(iu, iv).any_pair(l) * sol_.phi[static_cast<std::size_t>(iv)] * dt * dt;
            }
        return acc;
    }

    // E-part of Cov: P(counted in cell l at t AND in cell lp at s), t <= s.
    Eigen::MatrixXd joint_prob(double t, int i1, double s, int i2, int iLg, int L) const {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(L, L);
        const double dt = cfg_.dt;
        if (s <= cfg_.tL) {
            // both counts are first captures; same individual stays put
            for (int l = 0; l < L; ++l) {
                double acc = 0.0;
                for (int j = 0; j <= std::min(i1, i2); ++j)
                    acc += cell_probs_[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] * sol_.phi[static_cast<std::size_t>(j)] * dt;
                J(l, l) = acc;
            }
        } else if (t <= cfg_.tL) {
            // first capture in A by t, second capture in B by s
            const int win = i2 - iLg;
            for (int iu = 0; iu <= i1; ++iu)
                for (int w = 1; w <= win; ++w) {
                    const int iv = iu + w;
                    if (iv >= n_) break;
                    const GridPairTable& tab = table_at(iu, iv);
                    const double c = cfg_.alpha * sol_.phi[static_cast<std::size_t>(iv)] * dt * dt;
                    for (int l = 0; l < L; ++l) {
                        const int ix = l % tab.nx, iy = l / tab.nx;
                        for (int lp = 0; lp < L; ++lp)
                            J(l, lp) += c * tab.px[static_cast<std::size_t>(ix) * tab.nx + lp % tab.nx] *
                                        tab.py[static_cast<std::size_t>(iy) * tab.ny + lp / tab.nx];
                    }
                }
        } else {
            // both checks after release: retained position is final
            const int win = std::min(i1, i2) - iLg;
            for (int l = 0; l < L; ++l) {
                double acc = 0.0;
                for (int j = iLg + 1; j <= std::min(i1, i2); ++j)
                    acc += cell_probs_[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] * sol_.phi[static_cast<std::size_t>(j)] * dt;
                for (int iu = 0; iu <= iLg; ++iu)
                    for (int w = 1; w <= win; ++w) {
                        const int iv = iu + w;
                        if (iv >= n_) break;
                        acc += cfg_.alpha * table_at(iu, iv).any_pair(l) * sol_.phi[static_cast<std::size_t>(iv)] * dt * dt;
                    }
                J(l, l) = acc;
            }
        }
        return J;
    }

    void ensure_first_cdf() {
        if (!first_cdf_.empty()) return;
        first_cdf_.resize(static_cast<std::size_t>(n_) + 1);
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) {
            acc += sol_.f[static_cast<std::size_t>(j)] * cfg_.dt;
            first_cdf_[static_cast<std::size_t>(j)] = acc;
        }
        first_cdf_[static_cast<std::size_t>(n_)] = 1.0; // no-capture atom
        if (acc > 1.0 + 1e-9) throw std::domain_error("CaptureModel: capture-time mass exceeds 1");
    }

    const std::vector<double>& second_cdf(int iu) {
        if (second_cdfs_.empty()) second_cdfs_.resize(static_cast<std::size_t>(iL_ + 1));
        auto& c = second_cdfs_[static_cast<std::size_t>(iu)];
        if (!c.empty()) return c;
        c.resize(static_cast<std::size_t>(h_) + 1);
        const double phu = sol_.phi[static_cast<std::size_t>(iu)];
        const double g1u = sol_.g1[static_cast<std::size_t>(iu)];
        double acc = 0.0;
        for (int s = 1; s <= h_; ++s) {
            const int iv = iu + s;
            if (iv < n_) {
                const GridPairTable& tab = table_at(iu, iv);
                acc += cfg_.alpha * tab.any_any() / g1u * sol_.phi[static_cast<std::size_t>(iv)] / phu * cfg_.dt;
            }
            c[static_cast<std::size_t>(s - 1)] = std::min(acc, 1.0);
        }
        c[static_cast<std::size_t>(h_)] = 1.0; // no second capture inside the window
        return c;
    }

    int sample_free_cell(Rng& rng, int iu) {
        if (free_cell_cdfs_.empty()) free_cell_cdfs_.resize(static_cast<std::size_t>(n_));
        auto& c = free_cell_cdfs_[static_cast<std::size_t>(iu)];
        if (c.empty()) {
            const auto& p = cell_probs_[static_cast<std::size_t>(iu)];
            c.resize(p.size());
            double acc = 0.0;
            for (std::size_t l = 0; l < p.size(); ++l) {
                acc += p[l];
                c[l] = acc;
            }
        }
        return static_cast<int>(rng.sample_cdf(c));
    }

    int sample_once_cell(Rng& rng, int iu) {
        if (once_cdfs_.empty()) once_cdfs_.resize(static_cast<std::size_t>(iL_ + 1));
        auto& c = once_cdfs_[static_cast<std::size_t>(iu)];
        if (c.empty()) {
            const auto& w = once_weights_[static_cast<std::size_t>(iu)];
            c.resize(w.size());
            double acc = 0.0;
            for (std::size_t l = 0; l < w.size(); ++l) {
                acc += w[l];
                c[l] = acc;
            }
        }
        return static_cast<int>(rng.sample_cdf(c));
    }

    // Joint cells for a twice-captured individual: the two-time table
    // factorizes per axis, so each axis is sampled marginally then
    // conditionally.
    void sample_pair_cells(Rng& rng, int iu, int iv, int& cell1, int& cell2) {
        PairSampler& ps = pair_sampler(iu, iv);
        const GridPairTable& tab = table_at(iu, iv);
        const int ix = static_cast<int>(rng.sample_cdf(ps.rowx));
        const int iy = static_cast<int>(rng.sample_cdf(ps.rowy));
        cell1 = iy * tab.nx + ix;
        const int jx = static_cast<int>(rng.sample_cdf(ps.condx(tab, ix)));
        const int jy = static_cast<int>(rng.sample_cdf(ps.condy(tab, iy)));
        cell2 = jy * tab.nx + jx;
    }

    struct PairSampler {
        std::vector<double> rowx, rowy;                 // marginal first-cell axis cdfs
        std::vector<std::vector<double>> cx, cy;        // conditional second-cell axis cdfs

        const std::vector<double>& condx(const GridPairTable& tab, int ix) {
            if (cx.empty()) cx.resize(static_cast<std::size_t>(tab.nx));
            auto& c = cx[static_cast<std::size_t>(ix)];
            if (c.empty()) {
                c.resize(static_cast<std::size_t>(tab.nx));
                double acc = 0.0;
                for (int j = 0; j < tab.nx; ++j) {
                    acc += tab.px[static_cast<std::size_t>(ix) * tab.nx + j];
                    c[static_cast<std::size_t>(j)] = acc;
                }
            }
            return c;
        }
        const std::vector<double>& condy(const GridPairTable& tab, int iy) {
            if (cy.empty()) cy.resize(static_cast<std::size_t>(tab.ny));
            auto& c = cy[static_cast<std::size_t>(iy)];
            if (c.empty()) {
                c.resize(static_cast<std::size_t>(tab.ny));
                double acc = 0.0;
                for (int j = 0; j < tab.ny; ++j) {
                    acc += tab.py[static_cast<std::size_t>(iy) * tab.ny + j];
                    c[static_cast<std::size_t>(j)] = acc;
                }
            }
            return c;
        }
    };

    PairSampler& pair_sampler(int iu, int iv) {
        if (pair_samplers_.empty())
            pair_samplers_.resize(tables_.size());
        auto& ps = pair_samplers_[static_cast<std::size_t>(iu) * static_cast<std::size_t>(h_) + static_cast<std::size_t>(iv - iu - 1)];
        if (ps.rowx.empty()) {
            const GridPairTable& tab = table_at(iu, iv);
            ps.rowx.resize(static_cast<std::size_t>(tab.nx));
            ps.rowy.resize(static_cast<std::size_t>(tab.ny));
            double acc = 0.0;
            for (int i = 0; i < tab.nx; ++i) {
                acc += tab.px_rowsum[static_cast<std::size_t>(i)];
                ps.rowx[static_cast<std::size_t>(i)] = acc;
            }
            acc = 0.0;
            for (int i = 0; i < tab.ny; ++i) {
                acc += tab.py_rowsum[static_cast<std::size_t>(i)];
                ps.rowy[static_cast<std::size_t>(i)] = acc;
            }
        }
        return ps;
    }

    BrownianAdvection traj_;
    CaptureConfig cfg_;
    VolterraSolution sol_;
    int n_ = 0, iL_ = 0, h_ = 0;
    std::vector<std::vector<double>> cell_probs_;
    std::vector<GridPairTable> tables_;
    std::vector<std::vector<double>> once_weights_;
    double max_clamp_ = 0.0;
    // sampling caches (lazy)
    std::vector<double> first_cdf_;
    std::vector<std::vector<double>> second_cdfs_, free_cell_cdfs_, once_cdfs_;
    std::vector<PairSampler> pair_samplers_;
};

} // namespace ecmabund
