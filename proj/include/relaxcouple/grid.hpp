#pragma once

#include <algorithm>
#include <cmath>

#include "relaxcouple/errors.hpp"

namespace relaxcouple {

/// Two-sided uniform mesh with the interface pinned at x = 0: cells of width
/// dx_left() on [x_left, 0] and dx_right() on [0, x_right].
struct Grid {
    double x_left = -1.0;
    double x_right = 1.0;
    int n_cells_left = 1;
    int n_cells_right = 1;

    double dx_left() const { return -x_left / n_cells_left; }
    double dx_right() const { return x_right / n_cells_right; }
    int n_cells_total() const { return n_cells_left + n_cells_right; }
};

inline Grid make_grid(double x_left, double x_right, int n_cells_left, int n_cells_right) {
    if (!(x_left < 0.0) || !(x_right > 0.0))
        throw validation_error("make_grid: domain must satisfy x_left < 0 < x_right");
    if (n_cells_left < 1 || n_cells_right < 1)
        throw validation_error("make_grid: need at least one cell per side");
    return Grid{x_left, x_right, n_cells_left, n_cells_right};
}

/// Grid with cell width as close to dx as the side lengths allow.
inline Grid make_grid_dx(double x_left, double x_right, double dx) {
    if (!(dx > 0.0)) throw validation_error("make_grid_dx: dx must be positive");
    const int nl = std::max(1, static_cast<int>(std::lround(-x_left / dx)));
    const int nr = std::max(1, static_cast<int>(std::lround(x_right / dx)));
    return make_grid(x_left, x_right, nl, nr);
}

}  // namespace relaxcouple
