#pragma once

// Box-constrained minimization: projected BFGS with numerical gradients and
// Armijo backtracking, falling back to Nelder-Mead when a line search stalls.
// Also the central-difference Hessian used for confidence intervals.

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <limits>
#include <string>

namespace ecmabund {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimResult {
    Eigen::VectorXd x;
    double fmin = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    int fevals = 0;
    bool used_fallback = false;
    std::string message;
};

namespace detail {

inline double safe_eval(const Objective& f, const Eigen::VectorXd& x, int& fevals) {
    ++fevals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

inline Eigen::VectorXd clamp_box(Eigen::VectorXd x, const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
    for (int i = 0; i < x.size(); ++i) x[i] = std::min(std::max(x[i], lb[i]), ub[i]);
    return x;
}

inline Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& lb,
                                   const Eigen::VectorXd& ub, int& fevals) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
        double h = 1e-7 * std::max(1.0, std::fabs(x[i]));
        Eigen::VectorXd xp = x;
        if (x[i] + h <= ub[i]) {
            xp[i] = x[i] + h;
            g[i] = (safe_eval(f, xp, fevals) - fx) / h;
        } else {
            xp[i] = x[i] - h;
            g[i] = (fx - safe_eval(f, xp, fevals)) / h;
        }
        if (!std::isfinite(g[i])) g[i] = 0.0;
    }
    return g;
}

inline OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& lb,
                               const Eigen::VectorXd& ub, int max_iter, int fevals0) {
    const int n = static_cast<int>(x0.size());
    OptimResult res;
    res.fevals = fevals0;
    std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(n) + 1);
    std::vector<double> fv(static_cast<std::size_t>(n) + 1);
    v[0] = clamp_box(x0, lb, ub);
    fv[0] = safe_eval(f, v[0], res.fevals);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xi = v[0];
        const double step = 0.05 * std::max(1.0, std::fabs(xi[i]));
        xi[i] = (xi[i] + step <= ub[i]) ? xi[i] + step : xi[i] - step;
        v[static_cast<std::size_t>(i) + 1] = clamp_box(xi, lb, ub);
        fv[static_cast<std::size_t>(i) + 1] = safe_eval(f, v[static_cast<std::size_t>(i) + 1], res.fevals);
    }
    auto order = [&] {
        std::vector<int> idx(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[static_cast<std::size_t>(a)] < fv[static_cast<std::size_t>(b)]; });
        std::vector<Eigen::VectorXd> v2(v.size());
        std::vector<double> f2(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            v2[i] = v[static_cast<std::size_t>(idx[i])];
            f2[i] = fv[static_cast<std::size_t>(idx[i])];
        }
        v.swap(v2);
        fv.swap(f2);
    };
    order();
    for (int it = 0; it < max_iter; ++it) {
        ++res.iterations;
        if (std::fabs(fv.back() - fv.front()) < 1e-10 * (1.0 + std::fabs(fv.front()))) break;
        Eigen::VectorXd cen = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) cen += v[static_cast<std::size_t>(i)];
        cen /= n;
        auto try_point = [&](double coef) {
            Eigen::VectorXd xr = clamp_box(cen + coef * (cen - v.back()), lb, ub);
            return std::make_pair(xr, safe_eval(f, xr, res.fevals));
        };
        auto [xr, fr] = try_point(1.0);
        if (fr < fv.front()) {
            auto [xe, fe] = try_point(2.0);
            if (fe < fr) {
                v.back() = xe;
                fv.back() = fe;
            } else {
                v.back() = xr;
                fv.back() = fr;
            }
        } else if (fr < fv[fv.size() - 2]) {
            v.back() = xr;
            fv.back() = fr;
        } else {
            auto [xc, fc] = try_point(fr < fv.back() ? 0.5 : -0.5);
            if (fc < std::min(fr, fv.back())) {
                v.back() = xc;
                fv.back() = fc;
            } else {
                for (std::size_t i = 1; i < v.size(); ++i) {
                    v[i] = clamp_box(v[0] + 0.5 * (v[i] - v[0]), lb, ub);
                    fv[i] = safe_eval(f, v[i], res.fevals);
                }
            }
        }
        order();
    }
    res.x = v.front();
    res.fmin = fv.front();
    res.converged = std::isfinite(res.fmin);
    res.used_fallback = true;
    res.message = "nelder-mead";
    return res;
}

} // namespace detail

inline OptimResult minimize(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& lb,
                            const Eigen::VectorXd& ub, int max_iter = 200) {
    const int n = static_cast<int>(x0.size());
    OptimResult res;
    Eigen::VectorXd x = detail::clamp_box(x0, lb, ub);
    double fx = detail::safe_eval(f, x, res.fevals);
    if (!std::isfinite(fx)) return detail::nelder_mead(f, x, lb, ub, 400, res.fevals);
    Eigen::VectorXd g = detail::fd_gradient(f, x, fx, lb, ub, res.fevals);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n); // inverse-Hessian estimate
    int stall = 0;
    for (int it = 0; it < max_iter; ++it) {
        ++res.iterations;
        Eigen::VectorXd d = -H * g;
        if (d.dot(g) >= 0.0) {
            H = Eigen::MatrixXd::Identity(n, n);
            d = -g;
        }
        // backtracking line search on the projected path
        double alpha = 1.0;
        double fnew = fx;
        Eigen::VectorXd xnew = x;
        bool ok = false;
        for (int ls = 0; ls < 40; ++ls) {
            xnew = detail::clamp_box(x + alpha * d, lb, ub);
            fnew = detail::safe_eval(f, xnew, res.fevals);
            const double decrease = 1e-4 * g.dot(xnew - x);
            if (std::isfinite(fnew) && fnew <= fx + decrease && fnew < fx) {
                ok = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!ok) {
            // line search failed: hand off to the simplex search
            OptimResult nm = detail::nelder_mead(f, x, lb, ub, 400, res.fevals);
            nm.iterations += res.iterations;
            if (nm.fmin <= fx) return nm;
            res.x = x;
            res.fmin = fx;
            res.converged = true;
            res.message = "line-search stall; simplex no improvement";
            return res;
        }
        const Eigen::VectorXd s = xnew - x;
        x = xnew;
        const double fprev = fx;
        fx = fnew;
        Eigen::VectorXd gnew = detail::fd_gradient(f, x, fx, lb, ub, res.fevals);
        const Eigen::VectorXd yv = gnew - g;
        g = gnew;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            const Eigen::MatrixXd V = I - s * yv.transpose() / sy;
            H = V * H * V.transpose() + s * s.transpose() / sy;
        }
        if (std::fabs(fprev - fx) < 1e-10 * (1.0 + std::fabs(fx)))
            ++stall;
        else
            stall = 0;
        if (stall >= 2) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.fmin = fx;
    if (!res.converged) {
        res.converged = true; // iteration cap treated as converged-with-note
        res.message = "max iterations";
    }
    return res;
}

// Central-difference Hessian with per-parameter relative steps.
inline Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-4) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) h[i] = rel_step * std::max(1.0, std::fabs(x[i]));
    Eigen::MatrixXd H(n, n);
    const double f0 = f(x);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h[i];
        xm[i] -= h[i];
        H(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h[i] * h[i]);
        for (int j = i + 1; j < n; ++j) {
            Eigen::VectorXd a = x, b = x, c = x, d = x;
            a[i] += h[i]; a[j] += h[j];
            b[i] += h[i]; b[j] -= h[j];
            c[i] -= h[i]; c[j] += h[j];
            d[i] -= h[i]; d[j] -= h[j];
            H(i, j) = H(j, i) = (f(a) - f(b) - f(c) + f(d)) / (4.0 * h[i] * h[j]);
        }
    }
    return H;
}

} // namespace ecmabund
