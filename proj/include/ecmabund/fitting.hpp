#pragma once

// Parameter estimation. MGLE maximizes a Gaussian pseudo-likelihood built
// from the model's exact mean and covariance (justified by the CLT in N);
// the EcoDiff baseline also admits an exact Poisson MLE. Uncertainty comes
// from the numerical Hessian at the optimum.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "capture.hpp"
#include "ecodiff.hpp"
#include "mvn.hpp"
#include "optim.hpp"
#include "snapshot.hpp"

namespace ecmabund {

inline constexpr double kVarEps = 1e-6;     // diagonal regularization of Sigma(theta)
inline constexpr double kChi2_4_95 = 9.487729036781154; // 95% quantile of chi^2_4

enum class ModelTag { snapshot, capture, ecodiff };
enum class FitMethod { mgle, mle };

// Parameter vector layout: (sigma, vx, vy, p) for snapshot/ecodiff,
// (sigma, vx, vy, alpha) for capture.
struct FitProblem {
    ModelTag model = ModelTag::snapshot;
    double t0 = 0.0, ox = 0.0, oy = 0.0;
    std::vector<double> times;
    Grid grid;
    double n_individuals = 0;
    // capture-specific
    double tL = 0.5, tH = 1.5, dt = 1.0 / 60.0;
    bool markov_approx = false;

    std::vector<std::vector<std::uint64_t>> data; // data[k][l], observed cells only
    Eigen::VectorXd lb, ub, init;
    std::uint64_t qmc_seed = 1;
    int dense_cell_budget = 500; // above this, low-signal cells go diagonal-only

    Eigen::VectorXd data_vector() const {
        const int K = static_cast<int>(times.size()), L = grid.n_cells();
        Eigen::VectorXd x(K * L);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l) x[k * L + l] = static_cast<double>(data[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
        return x;
    }

    void default_bounds() {
        lb.resize(4);
        ub.resize(4);
        lb << 1e-2, -50.0, -50.0, 1e-4;
        const double a_hi = model == ModelTag::capture ? 0.999 / (tH - t0) : 1.0;
        ub << 50.0, 50.0, 50.0, a_hi;
    }
};

struct FitResult {
    Eigen::VectorXd estimates;
    double loglik = -std::numeric_limits<double>::infinity();
    double cc_loglik = 0.0; // continuity-corrected log-likelihood (reported, not optimized)
    double cc_se = 0.0;
    bool cc_converged = false;
    Eigen::MatrixXd hessian; // of the negative log-likelihood
    bool hessian_pd = false;
    Eigen::VectorXd ci_lo, ci_hi;
    bool converged = false;
    bool used_fallback = false;
    int fevals = 0;
    std::string message;
};

inline Moments model_moments(const FitProblem& prob, const Eigen::VectorXd& theta) {
    const BrownianAdvection traj(prob.t0, prob.ox, prob.oy, theta[1], theta[2], theta[0]);
    switch (prob.model) {
    case ModelTag::snapshot:
        return snapshot_moments(prob.n_individuals, theta[3], traj, prob.times, prob.grid, prob.markov_approx);
    case ModelTag::capture: {
        CaptureConfig cfg;
        cfg.alpha = theta[3];
        cfg.t0 = prob.t0;
        cfg.tL = prob.tL;
        cfg.tH = prob.tH;
        cfg.dt = prob.dt;
        cfg.grid = prob.grid;
        cfg.check_times = prob.times;
        cfg.markov_approx = prob.markov_approx;
        return CaptureModel(traj, cfg).moments(prob.n_individuals);
    }
    case ModelTag::ecodiff: {
        const auto lam = ecodiff_intensities(prob.n_individuals, theta[3], traj, prob.times, prob.grid);
        const int K = static_cast<int>(lam.size()), L = prob.grid.n_cells();
        Moments m;
        m.mean.resize(K * L);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l) m.mean[k * L + l] = lam[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
        m.cov = m.mean.asDiagonal(); // independent Poisson components
        return m;
    }
    }
    throw std::logic_error("model_moments: bad tag");
}

// Gaussian log-density of the data under N(m(theta), Sigma(theta) + eps I).
// For very wide designs only cells carrying signal (model mean above 1e-12 or
// a nonzero observation) enter the dense block; the rest contribute their
// regularized diagonal terms.
inline double gaussian_pseudo_loglik(const FitProblem& prob, const Eigen::VectorXd& theta) {
    Moments m;
    try {
        m = model_moments(prob, theta);
    } catch (const std::exception&) {
        return -std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd x = prob.data_vector();
    const int d = static_cast<int>(x.size());
    std::vector<int> active;
    active.reserve(static_cast<std::size_t>(d));
    double ll = 0.0;
    if (d > prob.dense_cell_budget) {
        for (int i = 0; i < d; ++i) {
            if (m.mean[i] > 1e-12 || x[i] > 0.0) {
                active.push_back(i);
            } else {
                const double v = m.cov(i, i) + kVarEps;
                const double r = x[i] - m.mean[i];
                ll += -0.5 * (std::log(2.0 * M_PI * v) + r * r / v);
            }
        }
    } else {
        for (int i = 0; i < d; ++i) active.push_back(i);
    }
    const int da = static_cast<int>(active.size());
    Eigen::MatrixXd S(da, da);
    Eigen::VectorXd r(da);
    for (int i = 0; i < da; ++i) {
        r[i] = x[active[static_cast<std::size_t>(i)]] - m.mean[active[static_cast<std::size_t>(i)]];
        for (int j = 0; j < da; ++j) S(i, j) = m.cov(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
        S(i, i) += kVarEps;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd z = llt.matrixL().solve(r);
    double logdet = 0.0;
    for (int i = 0; i < da; ++i) logdet += std::log(llt.matrixL()(i, i));
    ll += -0.5 * da * std::log(2.0 * M_PI) - logdet - 0.5 * z.squaredNorm();
    return ll;
}

// log P(data - 0.5 <= Y <= data + 0.5) for Y ~ N(m(theta), Sigma(theta)+eps I).
inline MvnResult continuity_corrected_prob(const FitProblem& prob, const Eigen::VectorXd& theta) {
    const Moments m = model_moments(prob, theta);
    const Eigen::VectorXd x = prob.data_vector();
    Eigen::MatrixXd S = m.cov;
    S.diagonal().array() += kVarEps;
    return mvn_rect(m.mean, S, x.array() - 0.5, x.array() + 0.5, prob.qmc_seed);
}

inline double continuity_corrected_loglik(const FitProblem& prob, const Eigen::VectorXd& theta, double* se = nullptr,
                                          bool* converged = nullptr) {
    const MvnResult r = continuity_corrected_prob(prob, theta);
    if (se) *se = r.prob > 0.0 ? r.se / r.prob : kInf;
    if (converged) *converged = r.converged;
    return r.prob > 0.0 ? std::log(r.prob) : -kInf;
}

inline double fit_objective(const FitProblem& prob, FitMethod method, const Eigen::VectorXd& theta) {
    if (method == FitMethod::mle) {
        if (prob.model != ModelTag::ecodiff) throw std::invalid_argument("fit: exact MLE only for ecodiff");
        const BrownianAdvection traj(prob.t0, prob.ox, prob.oy, theta[1], theta[2], theta[0]);
        return ecodiff_loglik(ecodiff_intensities(prob.n_individuals, theta[3], traj, prob.times, prob.grid), prob.data);
    }
    return gaussian_pseudo_loglik(prob, theta);
}

// Method-of-moments style starting point for data-driven fits: sigma from the
// count spread around the centroid, v from centroid drift, last parameter
// from the total-count ratio.
inline Eigen::VectorXd heuristic_init(const FitProblem& prob) {
    const int K = static_cast<int>(prob.times.size()), L = prob.grid.n_cells();
    const auto centers = prob.grid.centers();
    Eigen::VectorXd th(4);
    double sig = 1.0, vx = 0.0, vy = 0.0, total = 0.0;
    double prev_cx = prob.ox, prev_cy = prob.oy, prev_t = prob.t0;
    for (int k = 0; k < K; ++k) {
        double n = 0, cx = 0, cy = 0;
        for (int l = 0; l < L; ++l) {
            const double c = static_cast<double>(prob.data[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
            n += c;
            cx += c * centers[static_cast<std::size_t>(l)].first;
            cy += c * centers[static_cast<std::size_t>(l)].second;
        }
        total += n;
        if (n > 0) {
            cx /= n;
            cy /= n;
            double s2 = 0;
            for (int l = 0; l < L; ++l) {
                const double c = static_cast<double>(prob.data[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
                const double dx = centers[static_cast<std::size_t>(l)].first - cx, dy = centers[static_cast<std::size_t>(l)].second - cy;
                s2 += c * (dx * dx + dy * dy);
            }
            s2 /= 2.0 * n; // per-coordinate variance
            const double e = prob.times[static_cast<std::size_t>(k)] - prob.t0;
            if (e > 0 && s2 > 0) sig = std::sqrt(s2 / e);
            const double de = prob.times[static_cast<std::size_t>(k)] - prev_t;
            if (de > 0) {
                vx = (cx - prev_cx) / de;
                vy = (cy - prev_cy) / de;
            }
            prev_cx = cx;
            prev_cy = cy;
            prev_t = prob.times[static_cast<std::size_t>(k)];
        }
    }
    const double ratio = prob.n_individuals > 0 ? std::min(0.99, total / (K * prob.n_individuals)) : 0.1;
    th << sig, vx, vy, std::max(1e-3, ratio);
    if (prob.model == ModelTag::capture) th[3] = std::min(th[3], 0.9 / (prob.tH - prob.t0));
    return th;
}

inline FitResult fit(const FitProblem& prob, FitMethod method, bool compute_cc = false) {
    FitProblem p = prob;
    if (p.lb.size() == 0) p.default_bounds();
    Eigen::VectorXd init = p.init.size() == 4 ? p.init : heuristic_init(p);
    const Objective neg = [&](const Eigen::VectorXd& th) { return -fit_objective(p, method, th); };
    OptimResult opt = minimize(neg, init, p.lb, p.ub);
    FitResult res;
    res.estimates = opt.x;
    res.loglik = -opt.fmin;
    res.converged = opt.converged && std::isfinite(opt.fmin);
    res.used_fallback = opt.used_fallback;
    res.fevals = opt.fevals;
    res.message = opt.message;
    res.hessian = numerical_hessian(neg, opt.x);
    Eigen::LLT<Eigen::MatrixXd> llt(res.hessian);
    res.hessian_pd = llt.info() == Eigen::Success;
    const int n = static_cast<int>(opt.x.size());
    res.ci_lo.resize(n);
    res.ci_hi.resize(n);
    if (res.hessian_pd) {
        const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        for (int i = 0; i < n; ++i) {
            const double sd = std::sqrt(std::max(0.0, inv(i, i)));
            res.ci_lo[i] = opt.x[i] - 1.96 * sd;
            res.ci_hi[i] = opt.x[i] + 1.96 * sd;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double hii = res.hessian(i, i);
            const double sd = hii > 0.0 ? 1.0 / std::sqrt(hii) : kInf;
            res.ci_lo[i] = opt.x[i] - 1.96 * sd;
            res.ci_hi[i] = opt.x[i] + 1.96 * sd;
        }
    }
    if (compute_cc) res.cc_loglik = continuity_corrected_loglik(p, opt.x, &res.cc_se, &res.cc_converged);
    return res;
}

struct Coverage {
    Eigen::VectorXd param_coverage;
    double ellipsoid_coverage = 0.0;
    int used = 0;
    int failed = 0;
    int ellipsoid_undefined = 0;
};

inline Coverage coverage_tally(const std::vector<FitResult>& results, const Eigen::VectorXd& truth) {
    if (results.empty()) throw std::invalid_argument("coverage_tally: no results");
    const int n = static_cast<int>(truth.size());
    Coverage cov;
    cov.param_coverage = Eigen::VectorXd::Zero(n);
    int ell_hits = 0, ell_total = 0;
    for (const auto& r : results) {
        if (!r.converged) {
            ++cov.failed;
            continue;
        }
        ++cov.used;
        for (int i = 0; i < n; ++i)
            if (truth[i] >= r.ci_lo[i] && truth[i] <= r.ci_hi[i]) cov.param_coverage[i] += 1.0;
        if (r.hessian.size() > 0 && r.hessian.norm() > 0.0) {
            const Eigen::VectorXd dlt = truth - r.estimates;
            if (dlt.transpose() * r.hessian * dlt <= kChi2_4_95) ++ell_hits;
            ++ell_total;
        } else {
            ++cov.ellipsoid_undefined;
        }
    }
    if (cov.used > 0) cov.param_coverage /= static_cast<double>(cov.used);
    cov.ellipsoid_coverage = ell_total > 0 ? static_cast<double>(ell_hits) / ell_total : 0.0;
    return cov;
}

} // namespace ecmabund
