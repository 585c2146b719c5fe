#pragma once

// Planar rectangles and regular grids of cells.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ecmabund {

struct Rect {
    double x0, x1, y0, y1;
};

// Regular nx-by-ny grid of axis-aligned cells tiling [xmin,xmax] x [ymin,ymax].
// Cells are indexed row-major: l = iy * nx + ix.
struct Grid {
    int nx = 0, ny = 0;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

    Grid() = default;
    Grid(int nx_, int ny_, double xmin_, double xmax_, double ymin_, double ymax_)
        : nx(nx_), ny(ny_), xmin(xmin_), xmax(xmax_), ymin(ymin_), ymax(ymax_) {
        if (nx <= 0 || ny <= 0 || xmax <= xmin || ymax <= ymin)
            throw std::invalid_argument("Grid: bad dimensions");
    }

    int n_cells() const { return nx * ny; }
    double dx() const { return (xmax - xmin) / nx; }
    double dy() const { return (ymax - ymin) / ny; }

    double xedge(int ix) const { return ix == nx ? xmax : xmin + ix * dx(); }
    double yedge(int iy) const { return iy == ny ? ymax : ymin + iy * dy(); }

    Rect cell(int l) const {
        const int ix = l % nx, iy = l / nx;
        return {xedge(ix), xedge(ix + 1), yedge(iy), yedge(iy + 1)};
    }

    // Cell centers, row-major.
    std::vector<std::pair<double, double>> centers() const {
        std::vector<std::pair<double, double>> c(static_cast<std::size_t>(n_cells()));
        for (int l = 0; l < n_cells(); ++l) {
            const Rect r = cell(l);
            c[static_cast<std::size_t>(l)] = {0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)};
        }
        return c;
    }

    // Cell index containing (x, y), or -1 if outside the grid.
    int locate(double x, double y) const {
        if (x < xmin || x >= xmax || y < ymin || y >= ymax) return -1;
        int ix = static_cast<int>((x - xmin) / dx());
        int iy = static_cast<int>((y - ymin) / dy());
        if (ix >= nx) ix = nx - 1;
        if (iy >= ny) iy = ny - 1;
        return iy * nx + ix;
    }
};

} // namespace ecmabund
