#pragma once

#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "relaxcouple/grid.hpp"
#include "relaxcouple/spectral.hpp"
#include "relaxcouple/sysmodel.hpp"

namespace relaxcouple {

/// Cell averages of the full state on the whole domain.
struct FVState {
    int ncomp = 0;
    int ncells = 0;
    double x_left = 0.0;
    double dx = 1.0;
    double time = 0.0;
    std::vector<double> u;  // u[cell * ncomp + comp]

    double cell_center(int i) const { return x_left + (i + 0.5) * dx; }

    bool all_finite() const {
        for (double x : u)
            if (!std::isfinite(x)) return false;
        return true;
    }

    double l2_norm() const {
        double s = 0.0;
        for (double x : u) s += x * x;
        return std::sqrt(s * dx);
    }
};

using FVMonitor = std::function<bool(const FVState&)>;
using FVInitFn = std::function<void(double x, std::span<double> out)>;

/// First-order upwind scheme with forward Euler for the stiff problem on the
/// full domain, relaxation time 1 on x <= 0 and eps_right on x > 0.
/// The step obeys both the advective restriction cfl*dx/lambda_max and the
/// explicit-source restriction eps_right / (2 max|eig S|). Zero exterior
/// ghost states close the outer boundaries.
inline FVState run_reference(const RelaxationSystem& sys, const Grid& grid, double cfl,
                             double t_end, const FVInitFn& init,
                             const FVMonitor& monitor = {}) {
    if (!(cfl > 0.0)) throw validation_error("run_reference: cfl must be positive");
    if (std::abs(grid.dx_left() - grid.dx_right()) >
        1e-12 * std::max(grid.dx_left(), grid.dx_right()))
        throw validation_error("run_reference: reference mesh must be uniform");

    const int n = sys.n;
    const int m = sys.m;
    const CharBasis cb = char_decomp(sys);
    const Mat ap = cb.a_plus();
    const Mat am = cb.a_minus();

    FVState st;
    st.ncomp = n;
    st.ncells = grid.n_cells_total();
    st.x_left = grid.x_left;
    st.dx = grid.dx_left();

    st.u.assign(static_cast<std::size_t>(st.ncells) * n, 0.0);
    {
        std::vector<double> val(n);
        for (int i = 0; i < st.ncells; ++i) {
            init(st.cell_center(i), std::span<double>(val.data(), n));
            for (int c = 0; c < n; ++c) st.u[static_cast<std::size_t>(i) * n + c] = val[c];
        }
    }
    if (monitor && !monitor(st)) return st;
    if (t_end <= 0.0) return st;

    double lam_max = 0.0;
    for (double lam : cb.lam_plus) lam_max = std::max(lam_max, std::abs(lam));
    for (double lam : cb.lam_minus) lam_max = std::max(lam_max, std::abs(lam));
    double s_max = 0.0;
    for (double lam : sym_eig(sys.S).values) s_max = std::max(s_max, std::abs(lam));
    const double dt0 = std::min(cfl * st.dx / lam_max, sys.eps_right / (2.0 * s_max));

    // Index of the first cell with center > 0 (the interface is a cell face).
    const int first_right = grid.n_cells_left;

    std::vector<double> next(st.u.size());
    std::vector<double> dminus(n), dplus(n);
    long step = 0;
    while (st.time < t_end - 1e-14) {
        const double dt = std::min(dt0, t_end - st.time);
        const double nu = dt / st.dx;
        const double* u = st.u.data();
        double* w = next.data();
        for (int i = 0; i < st.ncells; ++i) {
            const double* ui = u + static_cast<std::size_t>(i) * n;
            const double* ul = (i > 0) ? ui - n : nullptr;
            const double* ur = (i + 1 < st.ncells) ? ui + n : nullptr;
            for (int c = 0; c < n; ++c) {
                dminus[c] = ui[c] - (ul ? ul[c] : 0.0);
                dplus[c] = (ur ? ur[c] : 0.0) - ui[c];
            }
            double* wi = w + static_cast<std::size_t>(i) * n;
            for (int r = 0; r < n; ++r) {
                double adv = 0.0;
                for (int c = 0; c < n; ++c)
                    adv += ap(r, c) * dminus[c] + am(r, c) * dplus[c];
                wi[r] = ui[r] - nu * adv;
            }
            const double inv_eps = (i >= first_right) ? 1.0 / sys.eps_right : 1.0;
            for (int r = 0; r < m; ++r) {
                double src = 0.0;
                for (int c = 0; c < m; ++c) src += sys.S(r, c) * ui[n - m + c];
                wi[n - m + r] += dt * inv_eps * src;
            }
        }
        st.u.swap(next);
        st.time += dt;
        if ((++step & 63) == 0 || st.time >= t_end - 1e-14) {
            if (!st.all_finite()) {
                std::ostringstream os;
                os << "run_reference: instability detected at t=" << st.time;
                throw instability_error(os.str());
            }
        }
        if (monitor && !monitor(st)) break;
    }
    return st;
}

/// Piecewise-constant lookup of the cell averages.
inline void eval_fv(const FVState& st, double x, std::span<double> out) {
    int cell = static_cast<int>((x - st.x_left) / st.dx);
    cell = std::clamp(cell, 0, st.ncells - 1);
    for (int c = 0; c < st.ncomp; ++c)
        out[c] = st.u[static_cast<std::size_t>(cell) * st.ncomp + c];
}

}  // namespace relaxcouple
