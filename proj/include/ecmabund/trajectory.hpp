#pragma once

// Movement models for a single individual in the plane. The library only
// needs one- and two-time rectangle probabilities plus path sampling, so
// that is the whole interface.

#include <memory>
#include <utility>
#include <vector>

#include "normal.hpp"
#include "rect.hpp"
#include "rng.hpp"

namespace ecmabund {

class Trajectory {
  public:
    virtual ~Trajectory() = default;

    virtual double start_time() const = 0;

    // P(X(t) in A)
    virtual double rect_prob(double t, const Rect& a) const = 0;

    // P(X(t) in A, X(s) in B)
    virtual double pair_rect_prob(double t, const Rect& a, double s, const Rect& b) const = 0;

    // Positions of one path at the given (ascending) times.
    virtual std::vector<std::pair<double, double>> sample_path(Rng& rng, const std::vector<double>& times) const = 0;
};

// All pairwise cell probabilities for two times on a regular grid, stored in
// per-axis product form: P{X(t) in cell(ix,iy), X(s) in cell(jx,jy)}
// = px[ix*nx+jx] * py[iy*ny+jy].
struct GridPairTable {
    int nx = 0, ny = 0;
    std::vector<double> px, py;               // nx*nx and ny*ny joint axis probs
    std::vector<double> px_colsum, py_colsum; // sums over the first (time t) index
    std::vector<double> px_rowsum, py_rowsum; // sums over the second (time s) index

    double cell_pair(int l, int lp) const {
        const int ix = l % nx, iy = l / nx, jx = lp % nx, jy = lp / nx;
        return px[ix * nx + jx] * py[iy * ny + jy];
    }
    // P{X(t) anywhere on grid, X(s) in cell lp}
    double any_pair(int lp) const { return px_colsum[lp % nx] * py_colsum[lp / nx]; }
    // P{X(t) in cell l, X(s) anywhere on grid}
    double pair_any(int l) const { return px_rowsum[l % nx] * py_rowsum[l / nx]; }
    // P{X(t) on grid, X(s) on grid}
    double any_any() const {
        double sx = 0.0, sy = 0.0;
        for (double v : px_colsum) sx += v;
        for (double v : py_colsum) sy += v;
        return sx * sy;
    }

    void finalize_sums() {
        px_colsum.assign(static_cast<std::size_t>(nx), 0.0);
        py_colsum.assign(static_cast<std::size_t>(ny), 0.0);
        px_rowsum.assign(static_cast<std::size_t>(nx), 0.0);
        py_rowsum.assign(static_cast<std::size_t>(ny), 0.0);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nx; ++j) {
                const double v = px[static_cast<std::size_t>(i) * nx + j];
                px_colsum[static_cast<std::size_t>(j)] += v;
                px_rowsum[static_cast<std::size_t>(i)] += v;
            }
        for (int i = 0; i < ny; ++i)
            for (int j = 0; j < ny; ++j) {
                const double v = py[static_cast<std::size_t>(i) * ny + j];
                py_colsum[static_cast<std::size_t>(j)] += v;
                py_rowsum[static_cast<std::size_t>(i)] += v;
            }
    }
};

// Planar Brownian motion with constant advection:
//   X(t) = origin + v (t - t0) + sigma B(t - t0),
// coordinates independent. (X(t), X(s)) is bivariate normal per coordinate
// with correlation sqrt(min elapsed / max elapsed).
class BrownianAdvection final : public Trajectory {
  public:
    BrownianAdvection(double t0, double ox, double oy, double vx, double vy, double sigma)
        : t0_(t0), ox_(ox), oy_(oy), vx_(vx), vy_(vy), sigma_(sigma) {
        if (sigma <= 0.0) throw std::invalid_argument("BrownianAdvection: sigma must be positive");
    }

    double start_time() const override { return t0_; }
    double sigma() const { return sigma_; }
    double vx() const { return vx_; }
    double vy() const { return vy_; }
    double ox() const { return ox_; }
    double oy() const { return oy_; }

    double rect_prob(double t, const Rect& a) const override {
        const double e = t - t0_;
        if (e <= 0.0) {
            const double x = ox_, y = oy_;
            return (x >= a.x0 && x < a.x1 && y >= a.y0 && y < a.y1) ? 1.0 : 0.0;
        }
        const double sd = sigma_ * std::sqrt(e);
        const double mx = ox_ + vx_ * e, my = oy_ + vy_ * e;
        return interval_prob(a.x0, a.x1, mx, sd) * interval_prob(a.y0, a.y1, my, sd);
    }

    double pair_rect_prob(double t, const Rect& a, double s, const Rect& b) const override {
        const double et = t - t0_, es = s - t0_;
        if (et <= 0.0) return rect_prob(t, a) * rect_prob(s, b);
        if (es <= 0.0) return rect_prob(s, b) * rect_prob(t, a);
        const double sdt = sigma_ * std::sqrt(et), sds = sigma_ * std::sqrt(es);
        const double rho = std::sqrt(std::min(et, es) / std::max(et, es));
        const double mtx = ox_ + vx_ * et, mty = oy_ + vy_ * et;
        const double msx = ox_ + vx_ * es, msy = oy_ + vy_ * es;
        const double p_x = bvn_rect((a.x0 - mtx) / sdt, (a.x1 - mtx) / sdt, (b.x0 - msx) / sds, (b.x1 - msx) / sds, rho);
        const double p_y = bvn_rect((a.y0 - mty) / sdt, (a.y1 - mty) / sdt, (b.y0 - msy) / sds, (b.y1 - msy) / sds, rho);
        return p_x * p_y;
    }

    std::vector<std::pair<double, double>> sample_path(Rng& rng, const std::vector<double>& times) const override {
        std::vector<std::pair<double, double>> out(times.size());
        double x = ox_, y = oy_, prev = t0_;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double dt = times[i] - prev;
            if (dt > 0.0) {
                const double sd = sigma_ * std::sqrt(dt);
                x += vx_ * dt + sd * rng.normal();
                y += vy_ * dt + sd * rng.normal();
            }
            out[i] = {x, y};
            prev = times[i];
        }
        return out;
    }

    // One-time cell probabilities for every cell of a grid, row-major.
    std::vector<double> grid_probs(double t, const Grid& g) const {
        const double e = t - t0_;
        std::vector<double> p(static_cast<std::size_t>(g.n_cells()));
        if (e <= 0.0) {
            for (int l = 0; l < g.n_cells(); ++l) p[static_cast<std::size_t>(l)] = rect_prob(t, g.cell(l));
            return p;
        }
        const double sd = sigma_ * std::sqrt(e);
        const double mx = ox_ + vx_ * e, my = oy_ + vy_ * e;
        std::vector<double> cx(static_cast<std::size_t>(g.nx) + 1), cy(static_cast<std::size_t>(g.ny) + 1);
        for (int i = 0; i <= g.nx; ++i) cx[static_cast<std::size_t>(i)] = norm_cdf((g.xedge(i) - mx) / sd);
        for (int i = 0; i <= g.ny; ++i) cy[static_cast<std::size_t>(i)] = norm_cdf((g.yedge(i) - my) / sd);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                p[static_cast<std::size_t>(iy * g.nx + ix)] =
                    std::max(0.0, cx[ix + 1] - cx[ix]) * std::max(0.0, cy[iy + 1] - cy[iy]);
        return p;
    }

    // Joint cell probabilities for two times, in product-by-axis form. Corner
    // CDF tables are differenced so the whole n_cells^2 table is O(nx^2 + ny^2).
    GridPairTable grid_pair_table(double t, double s, const Grid& g) const {
        GridPairTable tab;
        tab.nx = g.nx;
        tab.ny = g.ny;
        const double et = t - t0_, es = s - t0_;
        if (et <= 0.0 || es <= 0.0) {
            // degenerate factor: joint = product of marginals
            const auto mt = axis_margins(t, g);
            const auto ms = axis_margins(s, g);
            tab.px.assign(static_cast<std::size_t>(g.nx) * g.nx, 0.0);
            tab.py.assign(static_cast<std::size_t>(g.ny) * g.ny, 0.0);
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.nx; ++j) tab.px[static_cast<std::size_t>(i) * g.nx + j] = mt.first[i] * ms.first[j];
            for (int i = 0; i < g.ny; ++i)
                for (int j = 0; j < g.ny; ++j) tab.py[static_cast<std::size_t>(i) * g.ny + j] = mt.second[i] * ms.second[j];
        } else {
            const double sdt = sigma_ * std::sqrt(et), sds = sigma_ * std::sqrt(es);
            const double rho = std::sqrt(std::min(et, es) / std::max(et, es));
            const double mtx = ox_ + vx_ * et, mty = oy_ + vy_ * et;
            const double msx = ox_ + vx_ * es, msy = oy_ + vy_ * es;
            tab.px = axis_pair(g.nx, [&](int i) { return (g.xedge(i) - mtx) / sdt; },
                               [&](int j) { return (g.xedge(j) - msx) / sds; }, rho);
            tab.py = axis_pair(g.ny, [&](int i) { return (g.yedge(i) - mty) / sdt; },
                               [&](int j) { return (g.yedge(j) - msy) / sds; }, rho);
        }
        tab.finalize_sums();
        return tab;
    }

  private:
    static double interval_prob(double lo, double hi, double mean, double sd) {
        return std::max(0.0, norm_cdf((hi - mean) / sd) - norm_cdf((lo - mean) / sd));
    }

    // Per-axis marginal cell probs at one time.
    std::pair<std::vector<double>, std::vector<double>> axis_margins(double t, const Grid& g) const {
        const double e = t - t0_;
        std::vector<double> mx(static_cast<std::size_t>(g.nx)), my(static_cast<std::size_t>(g.ny));
        if (e <= 0.0) {
            for (int i = 0; i < g.nx; ++i)
                mx[static_cast<std::size_t>(i)] = (ox_ >= g.xedge(i) && ox_ < g.xedge(i + 1)) ? 1.0 : 0.0;
            for (int i = 0; i < g.ny; ++i)
                my[static_cast<std::size_t>(i)] = (oy_ >= g.yedge(i) && oy_ < g.yedge(i + 1)) ? 1.0 : 0.0;
        } else {
            const double sd = sigma_ * std::sqrt(e);
            for (int i = 0; i < g.nx; ++i)
                mx[static_cast<std::size_t>(i)] = interval_prob(g.xedge(i), g.xedge(i + 1), ox_ + vx_ * e, sd);
            for (int i = 0; i < g.ny; ++i)
                my[static_cast<std::size_t>(i)] = interval_prob(g.yedge(i), g.yedge(i + 1), oy_ + vy_ * e, sd);
        }
        return {mx, my};
    }

    template <class F1, class F2>
    static std::vector<double> axis_pair(int n, F1 zt, F2 zs, double rho) {
        // (n+1)x(n+1) corner table of upper-quadrant probs, then 4-corner differences
        std::vector<double> corner(static_cast<std::size_t>(n + 1) * (n + 1));
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                corner[static_cast<std::size_t>(i) * (n + 1) + j] = bvnu(zt(i), zs(j), rho);
        std::vector<double> p(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const auto c = [&](int a, int b) { return corner[static_cast<std::size_t>(a) * (n + 1) + b]; };
                p[static_cast<std::size_t>(i) * n + j] =
                    std::max(0.0, c(i, j) - c(i + 1, j) - c(i, j + 1) + c(i + 1, j + 1));
            }
        return p;
    }

    double t0_, ox_, oy_, vx_, vy_, sigma_;
};

// Joint table P(X(t_early) in cell l) * P(X(t_late) in cell lp | X(t_early) = z_l),
// the center-point Markov shortcut for two-time cell probabilities.
inline GridPairTable markov_pair_table(const BrownianAdvection& traj, double t_early, double t_late, const Grid& g) {
    GridPairTable tab;
    tab.nx = g.nx;
    tab.ny = g.ny;
    const double e = t_early - traj.start_time();
    const double dt = t_late - t_early;
    const double sd_c = traj.sigma() * std::sqrt(std::max(dt, 0.0));
    auto axis = [&](int n, auto edge, double origin, double vel) {
        std::vector<double> p(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            double m_i;
            if (e <= 0.0) {
                m_i = (origin >= edge(i) && origin < edge(i + 1)) ? 1.0 : 0.0;
            } else {
                const double sd = traj.sigma() * std::sqrt(e);
                const double mu = origin + vel * e;
                m_i = std::max(0.0, norm_cdf((edge(i + 1) - mu) / sd) - norm_cdf((edge(i) - mu) / sd));
            }
            const double z = 0.5 * (edge(i) + edge(i + 1));
            const double mc = z + vel * dt;
            for (int j = 0; j < n; ++j) {
                double cond;
                if (sd_c <= 0.0)
                    cond = (mc >= edge(j) && mc < edge(j + 1)) ? 1.0 : 0.0;
                else
                    cond = std::max(0.0, norm_cdf((edge(j + 1) - mc) / sd_c) - norm_cdf((edge(j) - mc) / sd_c));
                p[static_cast<std::size_t>(i) * n + j] = m_i * cond;
            }
        }
        return p;
    };
    tab.px = axis(g.nx, [&](int i) { return g.xedge(i); }, traj.ox(), traj.vx());
    tab.py = axis(g.ny, [&](int i) { return g.yedge(i); }, traj.oy(), traj.vy());
    tab.finalize_sums();
    return tab;
}

} // namespace ecmabund
