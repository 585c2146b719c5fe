#include <catch2/catch_amalgamated.hpp>

#include "ecmabund/capture.hpp"

using namespace ecmabund;

TEST_CASE("alpha validity gate") {
    double margin = 0;
    CHECK(check_alpha_validity(0.1, 0.0, 1.5, &margin));
    CHECK(margin == Catch::Approx(0.85));
    CHECK_FALSE(check_alpha_validity(1.0, 0.0, 1.5));
    CHECK_FALSE(check_alpha_validity(2.0 / 3.0, 0.0, 1.5, &margin)); // boundary counts as invalid
    CHECK(margin == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("full-space kernel has exponential capture density") {
    const double alpha = 0.3, t0 = 0.2, tH = 1.7;
    auto err_at = [&](double dt) {
        const auto sol = solve_volterra(full_space_kernel(), alpha, t0, tH, dt);
        double worst = 0;
        for (std::size_t k = 0; k < sol.times.size(); ++k) {
            const double exact = alpha * std::exp(-alpha * (sol.times[k] - t0));
            worst = std::max(worst, std::fabs(sol.f[k] - exact));
        }
        return worst;
    };
    const double e1 = err_at(1.0 / 60.0), e2 = err_at(1.0 / 120.0);
    CHECK(e1 < 5e-4);
    // first-order rule: halving dt roughly halves the error
    CHECK(e2 < 0.65 * e1);
    // phi = f / g1 = f here
    const auto sol = solve_volterra(full_space_kernel(), alpha, t0, tH, 1.0 / 60.0);
    for (std::size_t k = 0; k < sol.times.size(); ++k) CHECK(sol.phi[k] == Catch::Approx(sol.f[k]));
}

TEST_CASE("escaping kernel matches its closed form") {
    const double alpha = 0.25, t0 = 0.0, tH = 1.5;
    for (int d : {1, 2, 3}) {
        auto err_at = [&](double dt) {
            const auto sol = solve_volterra(escaping_kernel(d, t0), alpha, t0, tH, dt);
            double worst = 0;
            for (std::size_t k = 0; k < sol.times.size(); ++k) {
                const double e = sol.times[k] - t0;
                const double exact = alpha * std::exp(-alpha * e) * chi2_cdf(1.0 / (e * e), d);
                worst = std::max(worst, std::fabs(sol.f[k] - exact));
            }
            return worst;
        };
        const double e1 = err_at(1.0 / 120.0);
        CHECK(e1 < 2e-3);
        CHECK(err_at(1.0 / 240.0) < 0.7 * e1);
    }
}

TEST_CASE("solver basics: positivity, mass bound, residual, small-alpha limit") {
    const double alpha = 0.4, t0 = 0.0, tH = 1.5, dt = 1.0 / 60.0;
    const auto kernel = escaping_kernel(2, t0);
    const auto sol = solve_volterra(kernel, alpha, t0, tH, dt);
    double mass = 0;
    for (std::size_t k = 0; k < sol.f.size(); ++k) {
        CHECK(sol.f[k] >= 0.0);
        CHECK(sol.phi[k] * sol.g1[k] == Catch::Approx(sol.f[k]).margin(1e-15));
        mass += sol.f[k] * dt;
    }
    CHECK(mass < 1.0);
    // residual of the discretized equation at every node
    for (std::size_t k = 0; k < sol.f.size(); ++k) {
        double acc = 0;
        for (std::size_t j = 0; j <= k; ++j)
            acc += kernel.g2(sol.times[k], sol.times[j]) / sol.g1[j] * sol.f[j] * dt;
        CHECK(sol.f[k] == Catch::Approx(alpha * sol.g1[k] - alpha * acc).margin(1e-13));
    }
    // alpha -> 0: f / alpha -> g1
    const auto tiny = solve_volterra(kernel, 1e-8, t0, tH, dt);
    for (std::size_t k = 0; k < tiny.f.size(); ++k)
        CHECK(tiny.f[k] / 1e-8 == Catch::Approx(tiny.g1[k]).epsilon(1e-6));
    CHECK(sol.index_of(0.5) == 29);
    CHECK(sol.times[29] == Catch::Approx(0.5));
}

TEST_CASE("second capture is memoryless in the full-space case") {
    const double alpha = 0.2, t0 = 0.0, tH = 1.5, dt = 1.0 / 60.0;
    const auto kernel = full_space_kernel();
    const auto sol = solve_volterra(kernel, alpha, t0, tH, dt);
    const int iu = sol.index_of(0.25);
    const auto d = second_capture_density(sol, kernel, alpha, iu);
    const double u = sol.times[static_cast<std::size_t>(iu)];
    double mass = 0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (static_cast<int>(j) <= iu) {
            CHECK(d[j] == 0.0);
            continue;
        }
        const double v = sol.times[j];
        CHECK(d[j] == Catch::Approx(alpha * std::exp(-alpha * (v - u))).epsilon(2e-2));
        mass += d[j] * dt;
    }
    CHECK(mass < 1.0);
    CHECK(mass == Catch::Approx(1.0 - std::exp(-alpha * (tH - u))).epsilon(0.05));
}

namespace {

CaptureConfig test_config(bool markov = false, double dt = 1.0 / 30.0) {
    CaptureConfig cfg;
    cfg.alpha = 0.1;
    cfg.t0 = 0.0;
    cfg.tL = 0.5;
    cfg.tH = 1.5;
    cfg.dt = dt;
    cfg.grid = Grid(2, 2, -10.0, 10.0, -10.0, 10.0);
    cfg.check_times = {0.5, 1.5};
    cfg.markov_approx = markov;
    return cfg;
}

BrownianAdvection drift() { return BrownianAdvection(0.0, 0.0, 0.0, -1.0, 1.0, 2.0); }

} // namespace

TEST_CASE("config validation") {
    auto cfg = test_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.check_times = {0.51}; // off the dt grid
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = test_config();
    cfg.alpha = 0.7; // alpha (tH - t0) >= 1
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = test_config();
    cfg.tL = 1.6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("capture moments: structural identities") {
    CaptureModel model(drift(), test_config());
    CHECK(model.max_clamp() < 1e-12);
    const double N = 500.0;
    const auto mo = model.moments(N);
    const int L = 4;
    // counts are nonnegative with subunit cell probabilities
    double total = 0;
    for (int i = 0; i < mo.mean.size(); ++i) {
        CHECK(mo.mean[i] >= 0.0);
        CHECK(mo.mean[i] <= N);
        total += mo.mean[i];
    }
    CHECK(total > 0.0);
    // covariance symmetry and positive semidefiniteness (up to roundoff)
    CHECK((mo.cov - mo.cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mo.cov);
    CHECK(es.eigenvalues().minCoeff() > -1e-8 * es.eigenvalues().maxCoeff());
    // counts at the later check dominate the earlier one in expectation only
    // through new captures: mean at tH >= retained mass can't exceed N
    double m1 = 0, m2 = 0;
    for (int l = 0; l < L; ++l) {
        m1 += mo.mean[l];
        m2 += mo.mean[L + l];
    }
    CHECK(m2 >= m1 - 1e-9); // traps accumulate; nothing is released before tL
}

TEST_CASE("capture simulator matches capture moments") {
    CaptureModel model(drift(), test_config());
    const std::uint64_t N = 400;
    const auto mo = model.moments(static_cast<double>(N));
    const int D = 8, reps = 3000;
    Rng rng(321);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(D);
    Eigen::MatrixXd sum2 = Eigen::MatrixXd::Zero(D, D);
    for (int r = 0; r < reps; ++r) {
        const auto c = model.simulate(rng, N);
        Eigen::VectorXd x(D);
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 4; ++l) x[k * 4 + l] = static_cast<double>(c[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
        sum += x;
        sum2 += x * x.transpose();
    }
    const Eigen::VectorXd mean = sum / reps;
    const Eigen::MatrixXd cov = sum2 / reps - mean * mean.transpose();
    for (int i = 0; i < D; ++i) {
        const double se = std::sqrt(std::max(mo.cov(i, i), 1e-12) / reps);
        CHECK(std::fabs(mean[i] - mo.mean[i]) <= 4 * se + 1e-9);
        for (int j = 0; j < D; ++j) {
            const double se_c =
                std::sqrt((mo.cov(i, i) * mo.cov(j, j) + mo.cov(i, j) * mo.cov(i, j)) / static_cast<double>(reps));
            CHECK(std::fabs(cov(i, j) - mo.cov(i, j)) <= 5 * se_c + 0.05);
        }
    }
}

TEST_CASE("capture records are internally consistent") {
    CaptureModel model(drift(), test_config());
    Rng rng(777);
    std::vector<CaptureRecord> recs;
    const auto counts = model.simulate(rng, 2000, &recs);
    REQUIRE(recs.size() == 2000);
    const auto& sol = model.solution();
    const int iL = sol.index_of(0.5);
    std::uint64_t early = 0, late = 0;
    for (const auto& r : recs) {
        if (r.first_index < 0) {
            CHECK(r.first_cell == -1);
            CHECK(r.second_index == -1);
            continue;
        }
        if (r.second_index >= 0) {
            CHECK(r.first_index <= iL); // second captures need T1 <= tL
            CHECK(r.second_index > iL);
            CHECK(r.second_cell >= 0);
            CHECK(r.first_cell >= 0);
        } else {
            CHECK(r.first_cell >= 0);
        }
        const bool counted_late = (r.first_index > iL) || r.second_index >= 0;
        if (r.first_index <= iL) ++early;
        if (counted_late) ++late;
    }
    std::uint64_t c1 = 0, c2 = 0;
    for (int l = 0; l < 4; ++l) {
        c1 += counts[0][static_cast<std::size_t>(l)];
        c2 += counts[1][static_cast<std::size_t>(l)];
    }
    CHECK(c1 == early);
    CHECK(c2 == late);
}

TEST_CASE("simulator determinism") {
    CaptureModel a(drift(), test_config()), b(drift(), test_config());
    Rng r1(5), r2(5);
    CHECK(a.simulate(r1, 300) == b.simulate(r2, 300));
}

TEST_CASE("markov approximation stays close to the exact tables") {
    CaptureModel exact(drift(), test_config(false));
    CaptureModel markov(drift(), test_config(true));
    const auto a = exact.moments(1000.0);
    const auto b = markov.moments(1000.0);
    for (int i = 0; i < a.mean.size(); ++i)
        CHECK(std::fabs(a.mean[i] - b.mean[i]) <= 0.05 * std::max(1.0, std::fabs(a.mean[i])));
}
