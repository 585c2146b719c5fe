#include <catch2/catch_amalgamated.hpp>

#include "ecmabund/mvn.hpp"
#include "ecmabund/normal.hpp"
#include "ecmabund/optim.hpp"
#include "ecmabund/rng.hpp"

using namespace ecmabund;

TEST_CASE("mvn_rect: diagonal covariance gives a product of 1-D probabilities") {
    const int d = 4;
    Eigen::VectorXd mean(d), lo(d), hi(d), var(d);
    mean << 0.5, -1.0, 2.0, 0.0;
    var << 1.0, 4.0, 0.25, 9.0;
    lo << -0.5, -2.0, 1.5, -1.0;
    hi << 1.5, 1.0, 2.5, 2.0;
    const Eigen::MatrixXd cov = var.asDiagonal();
    double expect = 1.0;
    for (int i = 0; i < d; ++i) {
        const double s = std::sqrt(var[i]);
        expect *= norm_cdf((hi[i] - mean[i]) / s) - norm_cdf((lo[i] - mean[i]) / s);
    }
    const auto res = mvn_rect(mean, cov, lo, hi, 1);
    CHECK(res.converged);
    CHECK(res.prob == Catch::Approx(expect).margin(1e-8));
}

TEST_CASE("mvn_rect: one and two dimensions against closed forms") {
    Eigen::VectorXd mean1(1), lo1(1), hi1(1);
    Eigen::MatrixXd cov1(1, 1);
    mean1 << 0.3;
    cov1 << 2.0;
    lo1 << -1.0;
    hi1 << 2.0;
    const double s = std::sqrt(2.0);
    const double exact1 = norm_cdf((2.0 - 0.3) / s) - norm_cdf((-1.0 - 0.3) / s);
    CHECK(mvn_rect(mean1, cov1, lo1, hi1, 3).prob == Catch::Approx(exact1).margin(1e-8));

    Eigen::VectorXd mean2 = Eigen::VectorXd::Zero(2), lo2(2), hi2(2);
    Eigen::MatrixXd cov2(2, 2);
    cov2 << 1.0, 0.6, 0.6, 1.0;
    lo2 << -0.8, -1.2;
    hi2 << 1.1, 0.7;
    const double exact2 = bvn_rect(lo2[0], hi2[0], lo2[1], hi2[1], 0.6);
    const auto res2 = mvn_rect(mean2, cov2, lo2, hi2, 3);
    CHECK(res2.prob == Catch::Approx(exact2).margin(4 * res2.se + 1e-6));
}

TEST_CASE("mvn_rect: 5-D equicorrelated case against a Monte Carlo oracle") {
    const int d = 5;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(d, d, 0.5);
    cov.diagonal().setOnes();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, -1.0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, 1.5);
    const auto res = mvn_rect(mean, cov, lo, hi, 17);
    // plain MC with the same covariance factor
    const Eigen::MatrixXd chol = cov.llt().matrixL();
    Rng rng(91);
    const int n = 2000000;
    std::int64_t hits = 0;
    Eigen::VectorXd z(d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) z[k] = rng.normal();
        const Eigen::VectorXd x = chol * z;
        bool in = true;
        for (int k = 0; k < d && in; ++k) in = x[k] >= lo[k] && x[k] <= hi[k];
        hits += in;
    }
    const double phat = static_cast<double>(hits) / n;
    const double se = std::sqrt(phat * (1 - phat) / n);
    CHECK(std::fabs(res.prob - phat) <= 4 * se + 2e-4);
    CHECK(res.converged);
    CHECK(res.se < 2e-3 * res.prob + 1e-6);
}

TEST_CASE("mvn_rect: determinism and degenerate inputs") {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    Eigen::MatrixXd cov(3, 3);
    cov << 1.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.0;
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -0.5);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 0.5);
    const auto a = mvn_rect(mean, cov, lo, hi, 123);
    const auto b = mvn_rect(mean, cov, lo, hi, 123);
    CHECK(a.prob == b.prob);
    // infinite box
    Eigen::VectorXd nlo = Eigen::VectorXd::Constant(3, -kInf);
    Eigen::VectorXd nhi = Eigen::VectorXd::Constant(3, kInf);
    CHECK(mvn_rect(mean, cov, nlo, nhi, 1).prob == Catch::Approx(1.0).margin(1e-6));
    // empty box
    Eigen::VectorXd swap_hi = Eigen::VectorXd::Constant(3, -1.0);
    Eigen::VectorXd swap_lo = Eigen::VectorXd::Constant(3, 1.0);
    CHECK(mvn_rect(mean, cov, swap_lo, swap_hi, 1).prob <= 1e-12);
}

TEST_CASE("minimize: quadratic bowl") {
    Eigen::VectorXd target(3);
    target << 1.0, -2.0, 0.5;
    auto f = [&](const Eigen::VectorXd& x) { return (x - target).squaredNorm(); };
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd lb = Eigen::VectorXd::Constant(3, -10.0);
    Eigen::VectorXd ub = Eigen::VectorXd::Constant(3, 10.0);
    const auto res = minimize(f, x0, lb, ub);
    CHECK(res.converged);
    CHECK((res.x - target).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(res.fmin < 1e-9);
}

TEST_CASE("minimize: active bound") {
    auto f = [](const Eigen::VectorXd& x) { return (x[0] - 3.0) * (x[0] - 3.0) + x[1] * x[1]; };
    Eigen::VectorXd x0(2), lb(2), ub(2);
    x0 << 0.0, 0.5;
    lb << -1.0, -1.0;
    ub << 2.0, 1.0; // optimum clamps to x0 = 2
    const auto res = minimize(f, x0, lb, ub);
    CHECK(res.x[0] == Catch::Approx(2.0).margin(1e-6));
    CHECK(res.x[1] == Catch::Approx(0.0).margin(1e-5));
}

TEST_CASE("minimize: Rosenbrock valley") {
    auto f = [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    Eigen::VectorXd x0(2), lb(2), ub(2);
    x0 << -1.2, 1.0;
    lb << -5.0, -5.0;
    ub << 5.0, 5.0;
    const auto res = minimize(f, x0, lb, ub, 2000);
    CHECK(res.fmin < 1e-6);
    CHECK(res.x[0] == Catch::Approx(1.0).margin(1e-2));
    CHECK(res.x[1] == Catch::Approx(1.0).margin(1e-2));
}

TEST_CASE("minimize: handles non-finite regions") {
    auto f = [](const Eigen::VectorXd& x) {
        if (x[0] > 1.5) return std::numeric_limits<double>::quiet_NaN();
        return (x[0] - 1.0) * (x[0] - 1.0);
    };
    Eigen::VectorXd x0(1), lb(1), ub(1);
    x0 << 0.0;
    lb << -5.0;
    ub << 5.0;
    const auto res = minimize(f, x0, lb, ub);
    CHECK(res.x[0] == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("numerical_hessian on a known quadratic form") {
    Eigen::MatrixXd a(2, 2);
    a << 4.0, 1.0, 1.0, 3.0;
    auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x) + x[0] - 2.0 * x[1]; };
    Eigen::VectorXd x(2);
    x << 0.7, -0.4;
    const Eigen::MatrixXd h = numerical_hessian(f, x);
    CHECK((h - a).cwiseAbs().maxCoeff() < 1e-5);
}
