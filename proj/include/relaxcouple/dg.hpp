#pragma once

#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "relaxcouple/coupling.hpp"
#include "relaxcouple/grid.hpp"
#include "relaxcouple/quadrature.hpp"
#include "relaxcouple/spectral.hpp"
#include "relaxcouple/sysmodel.hpp"

namespace relaxcouple {

/// Component-wise initial data: fills `out` (one value per state component)
/// at position x.
using InitFn = std::function<void(double x, std::span<double> out)>;

/// Modal coefficients on the two-sided grid. Scaled Legendre basis per cell,
/// so the mass matrix is diagonal with entries dx / (2j+1). Layout per side:
/// coeff[(cell * ncomp + comp) * (k+1) + mode].
struct DGState {
    int k = 1;
    int ncomp_left = 0, ncomp_right = 0;
    int ncells_left = 0, ncells_right = 0;
    double time = 0.0;
    std::vector<double> left, right;

    static DGState shaped(int k, int ncomp_left, int ncomp_right, int ncells_left,
                          int ncells_right) {
        DGState s;
        s.k = k;
        s.ncomp_left = ncomp_left;
        s.ncomp_right = ncomp_right;
        s.ncells_left = ncells_left;
        s.ncells_right = ncells_right;
        s.left.assign(static_cast<std::size_t>(ncells_left) * ncomp_left * (k + 1), 0.0);
        s.right.assign(static_cast<std::size_t>(ncells_right) * ncomp_right * (k + 1), 0.0);
        return s;
    }

    std::size_t idx_left(int cell, int comp, int mode) const {
        return (static_cast<std::size_t>(cell) * ncomp_left + comp) * (k + 1) + mode;
    }
    std::size_t idx_right(int cell, int comp, int mode) const {
        return (static_cast<std::size_t>(cell) * ncomp_right + comp) * (k + 1) + mode;
    }

    bool all_finite() const {
        for (double x : left)
            if (!std::isfinite(x)) return false;
        for (double x : right)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

namespace dgdetail {

/// y = a*x + b*y over both sides (time stepping helper).
inline void axpby(double a, const DGState& x, double b, DGState& y) {
    for (std::size_t i = 0; i < y.left.size(); ++i) y.left[i] = a * x.left[i] + b * y.left[i];
    for (std::size_t i = 0; i < y.right.size(); ++i)
        y.right[i] = a * x.right[i] + b * y.right[i];
}

/// G[j][l] = integral over [-1,1] of P_j'(s) P_l(s) ds; equals 2 when l < j
/// with j - l odd, else 0.
inline std::vector<std::vector<double>> grad_mass_table(int k) {
    std::vector<std::vector<double>> g(k + 1, std::vector<double>(k + 1, 0.0));
    for (int j = 0; j <= k; ++j)
        for (int l = 0; l < j; ++l)
            if ((j - l) % 2 == 1) g[j][l] = 2.0;
    return g;
}

/// One homogeneous DG block: ncells cells of width dx carrying ncomp
/// components with split flux matrices and an optional source.
struct Block {
    int ncomp = 0;
    int ncells = 0;
    double dx = 1.0;
    Mat a_plus, a_minus;  // flux splitting A = a_plus + a_minus
    Mat source;           // ncomp x ncomp, may be all zero

    bool has_source = false;
};

/// Semi-discrete residual for one block. `flux_left` / `flux_right` are the
/// boundary fluxes at the block ends. Interior fluxes are upwind.
inline void block_rhs(const Block& blk, int k, const std::vector<std::vector<double>>& g,
                      std::span<const double> coef, std::span<const double> flux_left,
                      std::span<const double> flux_right, std::span<double> out) {
    const int nc = blk.ncomp;
    const int km = k + 1;
    const std::size_t cell_stride = static_cast<std::size_t>(nc) * km;

    // Edge traces per cell: value at the right edge is the plain mode sum,
    // at the left edge the alternating sum.
    std::vector<double> trace_r(static_cast<std::size_t>(blk.ncells) * nc);
    std::vector<double> trace_l(static_cast<std::size_t>(blk.ncells) * nc);
    for (int i = 0; i < blk.ncells; ++i) {
        const double* c = coef.data() + i * cell_stride;
        for (int comp = 0; comp < nc; ++comp) {
            double sr = 0.0, sl = 0.0, sgn = 1.0;
            for (int j = 0; j < km; ++j) {
                sr += c[comp * km + j];
                sl += sgn * c[comp * km + j];
                sgn = -sgn;
            }
            trace_r[static_cast<std::size_t>(i) * nc + comp] = sr;
            trace_l[static_cast<std::size_t>(i) * nc + comp] = sl;
        }
    }

    // Numerical fluxes on the ncells+1 cell boundaries.
    std::vector<double> flux(static_cast<std::size_t>(blk.ncells + 1) * nc);
    for (int comp = 0; comp < nc; ++comp) {
        flux[comp] = flux_left[comp];
        flux[static_cast<std::size_t>(blk.ncells) * nc + comp] = flux_right[comp];
    }
    for (int b = 1; b < blk.ncells; ++b) {
        const double* ul = &trace_r[static_cast<std::size_t>(b - 1) * nc];
        const double* ur = &trace_l[static_cast<std::size_t>(b) * nc];
        double* f = &flux[static_cast<std::size_t>(b) * nc];
        for (int r = 0; r < nc; ++r) {
            double s = 0.0;
            for (int cidx = 0; cidx < nc; ++cidx)
                s += blk.a_plus(r, cidx) * ul[cidx] + blk.a_minus(r, cidx) * ur[cidx];
            f[r] = s;
        }
    }

    std::vector<double> w(nc), aw(nc);
    for (int i = 0; i < blk.ncells; ++i) {
        const double* c = coef.data() + i * cell_stride;
        double* d = out.data() + i * cell_stride;
        const double* fl = &flux[static_cast<std::size_t>(i) * nc];
        const double* fr = &flux[static_cast<std::size_t>(i + 1) * nc];
        for (int j = 0; j < km; ++j) {
            // Volume term: A * sum_l G[j][l] c_l.
            for (int comp = 0; comp < nc; ++comp) {
                double s = 0.0;
                for (int l = 0; l < j; ++l)
                    if (g[j][l] != 0.0) s += g[j][l] * c[comp * km + l];
                w[comp] = s;
            }
            for (int r = 0; r < nc; ++r) {
                double s = 0.0;
                for (int cidx = 0; cidx < nc; ++cidx) s += blk.a_plus(r, cidx) * w[cidx];
                aw[r] = s;
            }
            for (int r = 0; r < nc; ++r) {
                double s = 0.0;
                for (int cidx = 0; cidx < nc; ++cidx) s += blk.a_minus(r, cidx) * w[cidx];
                aw[r] += s;
            }

            const double scale = (2.0 * j + 1.0) / blk.dx;
            const double edge_sign = (j % 2 == 0) ? 1.0 : -1.0;
            for (int comp = 0; comp < nc; ++comp)
                d[comp * km + j] =
                    scale * (aw[comp] - fr[comp] + edge_sign * fl[comp]);
        }
        if (blk.has_source) {
            for (int j = 0; j < km; ++j) {
                for (int r = 0; r < nc; ++r) {
                    double s = 0.0;
                    for (int cidx = 0; cidx < nc; ++cidx)
                        s += blk.source(r, cidx) * c[cidx * km + j];
                    d[r * km + j] += s;
                }
            }
        }
    }
}

}  // namespace dgdetail

/// Precomputed data for the coupled two-domain scheme: the full system on
/// the left of the interface, the equilibrium system on the right, upwind
/// fluxes inside each domain and coupling-trace fluxes at x = 0.
class DGOperator {
public:
    DGOperator(const RelaxationSystem& sys, const CharBasis& cb, const EquilBasis& eb,
               const CouplingMatrices& cm, const Grid& grid, int k)
        : sys_(sys), cb_(cb), eb_(eb), grid_(grid), k_(k),
          g_(dgdetail::grad_mass_table(k)) {
        if (k < 1) throw validation_error("DGOperator: polynomial degree must be >= 1");
        left_.ncomp = sys.n;
        left_.ncells = grid.n_cells_left;
        left_.dx = grid.dx_left();
        left_.a_plus = cb.a_plus();
        left_.a_minus = cb.a_minus();
        left_.source = source_matrix(sys);
        left_.has_source = true;

        right_.ncomp = sys.n - sys.m;
        right_.ncells = grid.n_cells_right;
        right_.dx = grid.dx_right();
        right_.a_plus = eb.a11_plus();
        right_.a_minus = eb.a11_minus();
        right_.source = Mat(right_.ncomp, right_.ncomp);
        right_.has_source = false;

        // Interface fluxes as linear maps of the outgoing traces
        // a = R_+^T U(0-), b = P_-^T u(0+):
        //   F = R_+ L+ a + R_- L- (B_ll a + B_lr b)
        //   f = P_+ L1+ (B_rl a + B_rr b) + P_- L1- b
        const Mat rp_lp = cb_.R_plus * diag(cb_.lam_plus);
        const Mat rm_lm = cb_.R_minus * diag(cb_.lam_minus);
        const Mat pp_lp = eb_.P_plus * diag(eb_.lam1_plus);
        const Mat pm_lm = eb_.P_minus * diag(eb_.lam1_minus);
        iface_F_a_ = rp_lp + rm_lm * cm.B_ll;
        iface_F_b_ = rm_lm * cm.B_lr;
        iface_f_a_ = pp_lp * cm.B_rl;
        iface_f_b_ = pp_lp * cm.B_rr + pm_lm;
    }

    const Grid& grid() const { return grid_; }
    int degree() const { return k_; }
    const RelaxationSystem& system() const { return sys_; }
    const CharBasis& char_basis() const { return cb_; }
    const EquilBasis& equil_basis() const { return eb_; }

    DGState make_state() const {
        return DGState::shaped(k_, left_.ncomp, right_.ncomp, left_.ncells, right_.ncells);
    }

    void rhs(const DGState& s, DGState& out) const {
        const int nc_l = left_.ncomp;
        const int nc_r = right_.ncomp;
        const int km = k_ + 1;

        // Traces adjacent to the interface.
        std::vector<double> u_left(nc_l, 0.0), u_right(nc_r, 0.0);
        {
            const int cell = left_.ncells - 1;
            for (int comp = 0; comp < nc_l; ++comp) {
                double s_sum = 0.0;
                for (int j = 0; j < km; ++j) s_sum += s.left[s.idx_left(cell, comp, j)];
                u_left[comp] = s_sum;
            }
            for (int comp = 0; comp < nc_r; ++comp) {
                double s_sum = 0.0, sgn = 1.0;
                for (int j = 0; j < km; ++j) {
                    s_sum += sgn * s.right[s.idx_right(0, comp, j)];
                    sgn = -sgn;
                }
                u_right[comp] = s_sum;
            }
        }
        const std::vector<double> a = cb_.R_plus.transpose() * u_left;
        const std::vector<double> b = eb_.P_minus.transpose() * u_right;

        std::vector<double> F_iface = iface_F_a_ * a;
        {
            const auto t = iface_F_b_ * b;
            for (std::size_t i = 0; i < F_iface.size(); ++i) F_iface[i] += t[i];
        }
        std::vector<double> f_iface = iface_f_a_ * a;
        {
            const auto t = iface_f_b_ * b;
            for (std::size_t i = 0; i < f_iface.size(); ++i) f_iface[i] += t[i];
        }

        // Outer closures: zero exterior state (compactly supported data).
        std::vector<double> F_outer(nc_l, 0.0);
        {
            std::vector<double> trace(nc_l);
            for (int comp = 0; comp < nc_l; ++comp) {
                double s_sum = 0.0, sgn = 1.0;
                for (int j = 0; j < km; ++j) {
                    s_sum += sgn * s.left[s.idx_left(0, comp, j)];
                    sgn = -sgn;
                }
                trace[comp] = s_sum;
            }
            F_outer = left_.a_minus * trace;
        }
        std::vector<double> f_outer(nc_r, 0.0);
        {
            std::vector<double> trace(nc_r);
            const int cell = right_.ncells - 1;
            for (int comp = 0; comp < nc_r; ++comp) {
                double s_sum = 0.0;
                for (int j = 0; j < km; ++j) s_sum += s.right[s.idx_right(cell, comp, j)];
                trace[comp] = s_sum;
            }
            f_outer = right_.a_plus * trace;
        }

        dgdetail::block_rhs(left_, k_, g_, s.left, F_outer, F_iface, out.left);
        dgdetail::block_rhs(right_, k_, g_, s.right, f_iface, f_outer, out.right);
    }

private:
    RelaxationSystem sys_;
    CharBasis cb_;
    EquilBasis eb_;
    Grid grid_;
    int k_;
    std::vector<std::vector<double>> g_;
    dgdetail::Block left_, right_;
    Mat iface_F_a_, iface_F_b_, iface_f_a_, iface_f_b_;
};

/// Per-cell L2 projection of component-wise initial data onto the modal
/// basis, by Gauss-Legendre quadrature with k+2 nodes (exact through degree
/// k polynomials and beyond).
inline DGState project_initial(const RelaxationSystem& sys, const Grid& grid, int k,
                               const InitFn& f) {
    DGState s = DGState::shaped(k, sys.n, sys.n - sys.m, grid.n_cells_left,
                                grid.n_cells_right);
    const QuadRule q = gauss_legendre(k + 2);
    std::vector<double> val(sys.n);
    std::vector<double> leg(k + 1);

    auto project_side = [&](bool is_left) {
        const int ncells = is_left ? grid.n_cells_left : grid.n_cells_right;
        const int ncomp = is_left ? sys.n : sys.n - sys.m;
        const double dx = is_left ? grid.dx_left() : grid.dx_right();
        const double x0 = is_left ? grid.x_left : 0.0;
        for (int i = 0; i < ncells; ++i) {
            const double xc = x0 + (i + 0.5) * dx;
            for (std::size_t qi = 0; qi < q.nodes.size(); ++qi) {
                const double x = xc + 0.5 * dx * q.nodes[qi];
                f(x, std::span<double>(val.data(), sys.n));
                legendre_all(k, q.nodes[qi], leg.data());
                for (int comp = 0; comp < ncomp; ++comp)
                    for (int j = 0; j <= k; ++j) {
                        const double contrib =
                            q.weights[qi] * val[comp] * leg[j] * (2.0 * j + 1.0) / 2.0;
                        if (is_left)
                            s.left[s.idx_left(i, comp, j)] += contrib;
                        else
                            s.right[s.idx_right(i, comp, j)] += contrib;
                    }
            }
        }
    };
    project_side(true);
    project_side(false);
    return s;
}

/// Evaluates the left-domain solution at x (x in [x_left, 0]).
inline void eval_left(const DGState& s, const Grid& grid, double x, std::span<double> out) {
    const double dx = grid.dx_left();
    int cell = static_cast<int>((x - grid.x_left) / dx);
    cell = std::clamp(cell, 0, grid.n_cells_left - 1);
    const double xc = grid.x_left + (cell + 0.5) * dx;
    const double xi = std::clamp(2.0 * (x - xc) / dx, -1.0, 1.0);
    std::vector<double> leg(s.k + 1);
    legendre_all(s.k, xi, leg.data());
    for (int comp = 0; comp < s.ncomp_left; ++comp) {
        double v = 0.0;
        for (int j = 0; j <= s.k; ++j) v += s.left[s.idx_left(cell, comp, j)] * leg[j];
        out[comp] = v;
    }
}

/// Evaluates the right-domain solution at x (x in [0, x_right]).
inline void eval_right(const DGState& s, const Grid& grid, double x, std::span<double> out) {
    const double dx = grid.dx_right();
    int cell = static_cast<int>(x / dx);
    cell = std::clamp(cell, 0, grid.n_cells_right - 1);
    const double xc = (cell + 0.5) * dx;
    const double xi = std::clamp(2.0 * (x - xc) / dx, -1.0, 1.0);
    std::vector<double> leg(s.k + 1);
    legendre_all(s.k, xi, leg.data());
    for (int comp = 0; comp < s.ncomp_right; ++comp) {
        double v = 0.0;
        for (int j = 0; j <= s.k; ++j) v += s.right[s.idx_right(cell, comp, j)] * leg[j];
        out[comp] = v;
    }
}

/// Three-stage strong-stability-preserving Runge-Kutta step:
/// u1 = u + dt L(u); u2 = 3/4 u + 1/4 (u1 + dt L(u1));
/// u_next = 1/3 u + 2/3 (u2 + dt L(u2)).
template <class State, class Rhs>
void ssp_rk3_step(State& u, double dt, Rhs&& rhs, State& u1, State& u2, State& l) {
    using namespace dgdetail;
    rhs(u, l);
    u1 = u;
    axpby(dt, l, 1.0, u1);

    rhs(u1, l);
    axpby(dt, l, 1.0, u1);   // u1 + dt L(u1)
    u2 = u;
    axpby(0.25, u1, 0.75, u2);

    rhs(u2, l);
    axpby(dt, l, 1.0, u2);   // u2 + dt L(u2)
    axpby(2.0 / 3.0, u2, 1.0 / 3.0, u);
    u.time += dt;
}

/// Convenience wrapper allocating its own stage storage.
inline DGState ssp_rk3_step(const DGState& u0, double dt,
                            const std::function<void(const DGState&, DGState&)>& rhs) {
    DGState u = u0, u1 = u0, u2 = u0, l = u0;
    ssp_rk3_step(u, dt, rhs, u1, u2, l);
    return u;
}

/// One semi-discrete residual evaluation through a freshly built operator.
inline DGState dg_rhs(const DGState& s, const RelaxationSystem& sys, const CharBasis& cb,
                      const EquilBasis& eb, const CouplingMatrices& cm, const Grid& grid) {
    DGOperator op(sys, cb, eb, cm, grid, s.k);
    DGState out = op.make_state();
    op.rhs(s, out);
    return out;
}

/// Step-by-step monitor; return value false aborts the run.
using StepMonitor = std::function<bool(const DGState&)>;

/// Integrates the coupled problem to t_end with SSP-RK3 and the advective
/// step restriction dt = cfl * min(dx) / max|eigenvalue of A|. The last step
/// is shortened to land exactly on t_end.
inline DGState run_dd(const RelaxationSystem& sys, const CouplingMatrices& cm,
                      const Grid& grid, int k, double cfl, double t_end, const InitFn& init,
                      const StepMonitor& monitor = {}) {
    if (!(cfl > 0.0)) throw validation_error("run_dd: cfl must be positive");
    if (t_end < 0.0) throw validation_error("run_dd: t_end must be nonnegative");

    const CharBasis cb = char_decomp(sys);
    const EquilBasis eb = equil_decomp(sys);
    DGOperator op(sys, cb, eb, cm, grid, k);

    DGState u = project_initial(sys, grid, k, init);
    if (monitor && !monitor(u)) return u;
    if (t_end == 0.0) return u;

    double lam_max = 0.0;
    for (double lam : cb.lam_plus) lam_max = std::max(lam_max, std::abs(lam));
    for (double lam : cb.lam_minus) lam_max = std::max(lam_max, std::abs(lam));
    const double dt0 = cfl * std::min(grid.dx_left(), grid.dx_right()) / lam_max;

    DGState u1 = u, u2 = u, l = u;
    auto rhs = [&op](const DGState& s, DGState& out) { op.rhs(s, out); };
    long step = 0;
    while (u.time < t_end - 1e-14) {
        const double dt = std::min(dt0, t_end - u.time);
        ssp_rk3_step(u, dt, rhs, u1, u2, l);
        if ((++step & 15) == 0 || u.time >= t_end - 1e-14) {
            if (!u.all_finite()) {
                std::ostringstream os;
                os << "run_dd: instability detected at t=" << u.time;
                throw instability_error(os.str());
            }
        }
        if (monitor && !monitor(u)) break;
    }
    return u;
}

/// Characteristic-weighted squared norm: incoming groups carry the small
/// weight delta on each side. Gauss quadrature with k+1 nodes per cell is
/// exact for the squared modal polynomials.
inline double weighted_l2_sq(const DGState& s, const Grid& grid, const CharBasis& cb,
                             const EquilBasis& eb, double delta) {
    if (!(delta > 0.0)) throw validation_error("weighted_l2_sq: delta must be positive");
    const QuadRule q = gauss_legendre(s.k + 1);
    const int km = s.k + 1;
    std::vector<double> leg(km);
    double total = 0.0;

    std::vector<double> val_l(s.ncomp_left);
    for (int cell = 0; cell < s.ncells_left; ++cell) {
        for (std::size_t qi = 0; qi < q.nodes.size(); ++qi) {
            legendre_all(s.k, q.nodes[qi], leg.data());
            for (int comp = 0; comp < s.ncomp_left; ++comp) {
                double v = 0.0;
                for (int j = 0; j < km; ++j) v += s.left[s.idx_left(cell, comp, j)] * leg[j];
                val_l[comp] = v;
            }
            const auto wp = cb.R_plus.transpose() * val_l;
            const auto wm = cb.R_minus.transpose() * val_l;
            double point = 0.0;
            for (double x : wp) point += x * x;
            for (double x : wm) point += delta * x * x;
            total += 0.5 * grid.dx_left() * q.weights[qi] * point;
        }
    }

    std::vector<double> val_r(s.ncomp_right);
    for (int cell = 0; cell < s.ncells_right; ++cell) {
        for (std::size_t qi = 0; qi < q.nodes.size(); ++qi) {
            legendre_all(s.k, q.nodes[qi], leg.data());
            for (int comp = 0; comp < s.ncomp_right; ++comp) {
                double v = 0.0;
                for (int j = 0; j < km; ++j)
                    v += s.right[s.idx_right(cell, comp, j)] * leg[j];
                val_r[comp] = v;
            }
            const auto wp = eb.P_plus.transpose() * val_r;
            const auto wm = eb.P_minus.transpose() * val_r;
            const auto w0 = eb.P_zero.transpose() * val_r;
            double point = 0.0;
            for (double x : wp) point += delta * x * x;
            for (double x : wm) point += x * x;
            for (double x : w0) point += x * x;
            total += 0.5 * grid.dx_right() * q.weights[qi] * point;
        }
    }
    return total;
}

}  // namespace relaxcouple
