#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "relaxcouple/coupling.hpp"
#include "relaxcouple/matkernels.hpp"
#include "relaxcouple/spectral.hpp"
#include "relaxcouple/sysmodel.hpp"

namespace relaxcouple {

/// Boundary condition matrix B U(0,t) = b(t) for the half-space problem,
/// p x n with full row rank.
struct BoundaryMatrix {
    Mat B;

    static BoundaryMatrix make(const Mat& b) {
        if (b.rows() == 0) return BoundaryMatrix{b};
        const EigResult e = sym_eig(b * b.transpose());
        const double top = std::abs(e.values.back());
        if (e.values.front() <= 1e-20 * top || top == 0.0)
            throw validation_error("BoundaryMatrix: rows are not linearly independent");
        return BoundaryMatrix{b};
    }
};

/// Searches a logarithmic grid c in {2^-20 .. 2^20} for a constant that
/// certifies y^T A y <= -c|y|^2 + (1/c)|By|^2 for all y, i.e.
/// A + cI - (1/c) B^T B negative semidefinite. Returns the first hit.
inline std::optional<double> strict_dissipative(const BoundaryMatrix& bm, const Mat& a) {
    if (bm.B.cols() != a.rows())
        throw validation_error("strict_dissipative: B must have n columns");
    const double slack = 1e-12 * std::max(1.0, a.max_abs());
    const Mat btb = bm.B.transpose() * bm.B;
    for (int k = -20; k <= 20; ++k) {
        const double c = std::ldexp(1.0, k);
        const Mat test = a + c * Mat::identity(a.rows()) - (1.0 / c) * btb;
        const EigResult e = sym_eig(0.5 * (test + test.transpose()));
        if (e.values.back() <= slack) return c;
    }
    return std::nullopt;
}

/// Basis of the right-stable subspace of M(xi,eta) = A^{-1}(eta Q - xi I),
/// computed through the symmetric-definite pencil A x = mu (xi I - eta Q) x:
/// M x = (-1/mu) x, so the stable directions are those with mu > 0. The
/// column count equals the number of positive eigenvalues of A for every
/// xi > 0, eta >= 0. Only real xi is sampled here, which makes this a
/// necessary-condition probe rather than a full admissibility verifier.
inline Mat right_stable(const RelaxationSystem& sys, double xi, double eta) {
    if (!(xi > 0.0)) throw validation_error("right_stable: xi must be positive");
    if (eta < 0.0) throw validation_error("right_stable: eta must be nonnegative");

    const Mat bspd = xi * Mat::identity(sys.n) - eta * source_matrix(sys);
    const EigResult pe = pencil_eig(sys.A, bspd);

    std::size_t count = 0;
    for (double mu : pe.values)
        if (mu > 0.0) ++count;
    Mat rs(sys.n, count);
    std::size_t j = 0;
    for (std::size_t i = 0; i < pe.values.size(); ++i)
        if (pe.values[i] > 0.0) rs.set_col(j++, pe.vectors.col(i));
    return rs;
}

inline std::vector<double> default_xi_grid() {
    std::vector<double> g;
    for (int k = -6; k <= 6; ++k) g.push_back(std::ldexp(1.0, k));
    return g;
}

inline std::vector<double> default_eta_grid() {
    std::vector<double> g{0.0};
    for (int k = -6; k <= 20; ++k) g.push_back(std::ldexp(1.0, k));
    return g;
}

struct GkcSampleRow {
    double xi, eta, abs_det;
};

struct GkcSampleResult {
    double min_abs_det = 0.0;
    double argmin_xi = 0.0, argmin_eta = 0.0;
    std::vector<GkcSampleRow> rows;
};

/// Samples |det(B * R_M^S(xi,eta))| over the grid, with the stable basis
/// orthonormalized first so the value does not depend on the basis choice.
inline GkcSampleResult gkc_sample(const RelaxationSystem& sys, const BoundaryMatrix& bm,
                                  const std::vector<double>& xi_grid,
                                  const std::vector<double>& eta_grid) {
    GkcSampleResult res;
    res.min_abs_det = std::numeric_limits<double>::infinity();
    bool checked_dims = false;
    for (double xi : xi_grid) {
        for (double eta : eta_grid) {
            const Mat rs = orthonormalize_columns(right_stable(sys, xi, eta));
            if (!checked_dims) {
                if (bm.B.rows() != rs.cols())
                    throw validation_error(
                        "gkc_sample: boundary matrix row count does not match the "
                        "stable subspace dimension");
                checked_dims = true;
            }
            const double d = std::abs(lu_det(bm.B * rs));
            res.rows.push_back({xi, eta, d});
            if (d < res.min_abs_det) {
                res.min_abs_det = d;
                res.argmin_xi = xi;
                res.argmin_eta = eta;
            }
        }
    }
    return res;
}

/// Analytic limit of the stable subspace as eta grows without bound at
/// xi = 1: columns [P_+, P_0, N R_S; 0, 0, K~ R_S].
inline Mat stable_subspace_limit(const RelaxationSystem& sys) {
    const EquilBasis eb = equil_decomp(sys);
    const SignCounts sc = sign_counts(sys);
    const LayerData ld = layer_data_with_manifold(sys, eb, sc);
    const std::size_t m = static_cast<std::size_t>(sys.m);
    auto lift = [&](const Mat& top) { return vcat(top, Mat(m, top.cols())); };
    return hcat(hcat(lift(eb.P_plus), lift(eb.P_zero)),
                vcat(ld.N * ld.R_S, ld.K_tilde * ld.R_S));
}

/// Largest principal angle (radians) between the column spans of two
/// matrices of equal column count.
inline double max_principal_angle(const Mat& a, const Mat& b) {
    if (a.cols() != b.cols())
        throw validation_error("max_principal_angle: subspace dimensions differ");
    if (a.cols() == 0) return 0.0;
    const Mat qa = orthonormalize_columns(a);
    const Mat qb = orthonormalize_columns(b);
    const Mat c = qa.transpose() * qb;
    const EigResult e = sym_eig(c.transpose() * c);
    const double cos2 = std::clamp(e.values.front(), 0.0, 1.0);
    return std::acos(std::sqrt(cos2));
}

}  // namespace relaxcouple
