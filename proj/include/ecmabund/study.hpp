#pragma once

// Simulation-study harness: fly-like designs, the (model x N x sigma) grid,
// per-replication fits with derived seeds, and aggregated bias/coverage rows.

#include <atomic>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "fitting.hpp"

namespace ecmabund {

struct DesignSpec {
    int nx = 15, ny = 15;
    double cell_side = 5.0; // metres
    double t0 = 0.0;
    std::vector<double> check_times = {0.5, 1.5}; // hours
    double tL = 0.5, tH = 1.5;
    double dt = 1.0 / 60.0;
};

inline Grid build_design(const DesignSpec& spec) {
    const double hx = 0.5 * spec.nx * spec.cell_side, hy = 0.5 * spec.ny * spec.cell_side;
    return Grid(spec.nx, spec.ny, -hx, hx, -hy, hy);
}

struct StudyConfig {
    std::vector<ModelTag> models = {ModelTag::snapshot, ModelTag::capture, ModelTag::ecodiff};
    std::vector<double> n_list = {100, 1000, 5644, 10000, 100000};
    std::vector<double> sigma_list = {2.0, 5.0, 10.0};
    double vx = -1.0, vy = 1.0, p = 0.1, alpha = 0.1;
    int replications = 50;
    std::uint64_t master_seed = 1;
    DesignSpec design;
    bool markov_approx = false;
    bool truth_init = true;
    FitMethod ecodiff_method = FitMethod::mle;
    int threads = 1;
};

struct ReplicationDetail {
    int rep = 0;
    Eigen::VectorXd estimates;
    double loglik = 0.0;
    bool converged = false;
    bool used_fallback = false;
};

struct StudyRow {
    ModelTag model;
    double n_individuals = 0, sigma = 0;
    Eigen::VectorXd mean_estimates; // over converged replications
    Coverage coverage;
    int replications = 0;
    std::vector<ReplicationDetail> detail;
};

struct StudyResult {
    StudyConfig config;
    std::vector<StudyRow> rows;
};

inline const char* model_name(ModelTag m) {
    switch (m) {
    case ModelTag::snapshot: return "snapshot";
    case ModelTag::capture: return "capture";
    case ModelTag::ecodiff: return "ecodiff";
    }
    return "?";
}

namespace detail {

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < std::min(threads, n); ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

// One replication: simulate data under the true parameters, then fit.
inline FitResult study_replication(const StudyConfig& cfg, ModelTag model, double n_ind, double sigma,
                                   std::uint64_t seed, Eigen::VectorXd* estimates_out = nullptr) {
    const Grid grid = build_design(cfg.design);
    const BrownianAdvection traj(cfg.design.t0, 0.0, 0.0, cfg.vx, cfg.vy, sigma);
    Rng rng(seed);
    FitProblem prob;
    prob.model = model;
    prob.t0 = cfg.design.t0;
    prob.times = cfg.design.check_times;
    prob.grid = grid;
    prob.n_individuals = n_ind;
    prob.tL = cfg.design.tL;
    prob.tH = cfg.design.tH;
    prob.dt = cfg.design.dt;
    prob.markov_approx = cfg.markov_approx;
    Eigen::VectorXd truth(4);
    truth << sigma, cfg.vx, cfg.vy, (model == ModelTag::capture ? cfg.alpha : cfg.p);
    if (model == ModelTag::snapshot) {
        prob.data = simulate_snapshot(rng, static_cast<std::uint64_t>(n_ind), cfg.p, traj, prob.times, grid);
    } else if (model == ModelTag::capture) {
        CaptureConfig cc;
        cc.alpha = cfg.alpha;
        cc.t0 = cfg.design.t0;
        cc.tL = cfg.design.tL;
        cc.tH = cfg.design.tH;
        cc.dt = cfg.design.dt;
        cc.grid = grid;
        cc.check_times = prob.times;
        cc.markov_approx = cfg.markov_approx;
        CaptureModel cm(traj, cc);
        prob.data = cm.simulate(rng, static_cast<std::uint64_t>(n_ind));
    } else {
        prob.data = simulate_ecodiff(rng, n_ind, cfg.p, traj, prob.times, grid);
    }
    if (cfg.truth_init) prob.init = truth;
    const FitMethod method = (model == ModelTag::ecodiff) ? cfg.ecodiff_method : FitMethod::mgle;
    FitResult res = fit(prob, method);
    if (estimates_out) *estimates_out = truth;
    return res;
}

inline StudyResult run_study(const StudyConfig& cfg) {
    StudyResult out;
    out.config = cfg;
    int cfg_idx = 0;
    for (ModelTag model : cfg.models)
        for (double sigma : cfg.sigma_list)
            for (double n_ind : cfg.n_list) {
                StudyRow row;
                row.model = model;
                row.n_individuals = n_ind;
                row.sigma = sigma;
                row.replications = cfg.replications;
                std::vector<FitResult> fits(static_cast<std::size_t>(cfg.replications));
                detail::parallel_for(cfg.replications, cfg.threads, [&](int r) {
                    const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(cfg_idx),
                                                           static_cast<std::uint64_t>(r));
                    fits[static_cast<std::size_t>(r)] = study_replication(cfg, model, n_ind, sigma, seed);
                });
                Eigen::VectorXd truth(4);
                truth << sigma, cfg.vx, cfg.vy, (model == ModelTag::capture ? cfg.alpha : cfg.p);
                row.coverage = coverage_tally(fits, truth);
                row.mean_estimates = Eigen::VectorXd::Zero(4);
                int used = 0;
                for (int r = 0; r < cfg.replications; ++r) {
                    const FitResult& f = fits[static_cast<std::size_t>(r)];
                    ReplicationDetail d;
                    d.rep = r;
                    d.estimates = f.estimates;
                    d.loglik = f.loglik;
                    d.converged = f.converged;
                    d.used_fallback = f.used_fallback;
                    row.detail.push_back(d);
                    if (f.converged) {
                        row.mean_estimates += f.estimates;
                        ++used;
                    }
                }
                if (used > 0) row.mean_estimates /= static_cast<double>(used);
                out.rows.push_back(std::move(row));
                ++cfg_idx;
            }
    return out;
}

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// One row per (model, N, sigma); schema stable and plottable.
inline std::string study_csv(const StudyResult& res) {
    std::string s = "model,N,sigma,mean_sigma,mean_vx,mean_vy,mean_rate,cov_sigma,cov_vx,cov_vy,cov_rate,"
                    "cov_ellipsoid,replications,failures\n";
    for (const auto& row : res.rows) {
        s += model_name(row.model);
        s += ',' + fmt_num(row.n_individuals) + ',' + fmt_num(row.sigma);
        for (int i = 0; i < 4; ++i) s += ',' + fmt_num(row.mean_estimates[i]);
        for (int i = 0; i < 4; ++i) s += ',' + fmt_num(row.coverage.param_coverage[i]);
        s += ',' + fmt_num(row.coverage.ellipsoid_coverage);
        s += ',' + std::to_string(row.replications) + ',' + std::to_string(row.coverage.failed) + '\n';
    }
    return s;
}

} // namespace ecmabund
