#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "relaxcouple/errors.hpp"
#include "relaxcouple/matrix.hpp"

namespace relaxcouple {

struct EigResult {
    std::vector<double> values;  // ascending
    Mat vectors;                 // columns, same order as values
};

namespace detail {

/// Flips each column so its first entry larger than 1e-12 in magnitude is
/// positive. Keeps decompositions deterministic across runs.
inline void fix_column_signs(Mat& v) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
        double lead = 0.0;
        for (std::size_t i = 0; i < v.rows(); ++i) {
            if (std::abs(v(i, j)) > 1e-12) {
                lead = v(i, j);
                break;
            }
        }
        if (lead == 0.0) {
            // all entries tiny: fall back to the largest one
            double best = 0.0;
            for (std::size_t i = 0; i < v.rows(); ++i)
                if (std::abs(v(i, j)) > std::abs(best)) best = v(i, j);
            lead = best;
        }
        if (lead < 0.0) v.scale_col(j, -1.0);
    }
}

inline void sort_eig_ascending(std::vector<double>& lam, Mat& v) {
    const std::size_t n = lam.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lam[a] < lam[b]; });
    std::vector<double> lam2(n);
    Mat v2(v.rows(), n);
    for (std::size_t j = 0; j < n; ++j) {
        lam2[j] = lam[order[j]];
        v2.set_col(j, v.col(order[j]));
    }
    lam = std::move(lam2);
    v = std::move(v2);
}

}  // namespace detail

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending, eigenvectors orthonormal with deterministic column
/// signs. `sym_tol` bounds the allowed asymmetry |M - M^T|_max; a negative
/// value selects 1e-12 * max(1, |M|_max).
inline EigResult sym_eig(const Mat& m, double sym_tol = -1.0) {
    if (m.rows() != m.cols())
        throw validation_error("sym_eig: matrix is not square");
    const std::size_t n = m.rows();
    if (sym_tol < 0.0) sym_tol = 1e-12 * std::max(1.0, m.max_abs());
    if (max_abs_diff(m, m.transpose()) > sym_tol)
        throw validation_error("sym_eig: matrix is not symmetric within tolerance");

    Mat a = m;
    Mat v = Mat::identity(n);
    if (n <= 1) {
        EigResult r{std::vector<double>(n), v};
        if (n == 1) r.values[0] = a(0, 0);
        return r;
    }

    const double fro = a.frobenius();
    const double stop = 1e-14 * fro;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
        off = std::sqrt(off);
        if (off <= stop) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<double> lam(n);
    for (std::size_t i = 0; i < n; ++i) lam[i] = a(i, i);
    detail::sort_eig_ascending(lam, v);
    detail::fix_column_signs(v);
    return {std::move(lam), std::move(v)};
}

/// Cholesky factor L (lower triangular, B = L L^T) of a symmetric positive
/// definite matrix. A pivot at or below 1e-13 * |B|_max is rejected.
inline Mat cholesky_spd(const Mat& b) {
    if (b.rows() != b.cols())
        throw validation_error("cholesky_spd: matrix is not square");
    const std::size_t n = b.rows();
    if (max_abs_diff(b, b.transpose()) > 1e-12 * std::max(1.0, b.max_abs()))
        throw validation_error("cholesky_spd: matrix is not symmetric");
    const double pivot_floor = 1e-13 * b.max_abs();

    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = b(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= pivot_floor)
            throw validation_error("cholesky_spd: not positive definite");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = b(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

namespace detail {

/// Solves L X = B for lower-triangular L.
inline Mat forward_solve_lower(const Mat& l, const Mat& b) {
    const std::size_t n = l.rows();
    Mat x = b;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, j);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, j);
            x(i, j) = s / l(i, i);
        }
    }
    return x;
}

/// Solves L^T X = B for lower-triangular L.
inline Mat back_solve_lower_transposed(const Mat& l, const Mat& b) {
    const std::size_t n = l.rows();
    Mat x = b;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t ii = n; ii-- > 0;) {
            double s = x(ii, j);
            for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x(k, j);
            x(ii, j) = s / l(ii, ii);
        }
    }
    return x;
}

}  // namespace detail

/// Symmetric-definite pencil M x = mu B x with B symmetric positive
/// definite, reduced by Cholesky B = L L^T to the ordinary symmetric problem
/// for L^{-1} M L^{-T}. Returns B-orthonormal eigenvectors (W^T B W = I).
inline EigResult pencil_eig(const Mat& msym, const Mat& bspd) {
    const Mat l = cholesky_spd(bspd);
    const Mat y = detail::forward_solve_lower(l, msym);
    Mat c = detail::forward_solve_lower(l, y.transpose()).transpose();
    c = 0.5 * (c + c.transpose());
    EigResult r = sym_eig(c);
    r.vectors = detail::back_solve_lower_transposed(l, r.vectors);
    detail::fix_column_signs(r.vectors);
    return r;
}

namespace detail {

struct LuFactors {
    Mat lu;                        // packed L (unit diagonal) and U
    std::vector<std::size_t> piv;  // row permutation
    int sign = 1;
    bool singular = false;
};

inline LuFactors lu_factor(const Mat& m) {
    const std::size_t n = m.rows();
    LuFactors f{m, std::vector<std::size_t>(n), 1, false};
    std::iota(f.piv.begin(), f.piv.end(), 0);
    const double pivot_floor = 1e-12 * m.max_abs();

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(f.lu(i, k)) > std::abs(f.lu(p, k))) p = i;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
            std::swap(f.piv[k], f.piv[p]);
            f.sign = -f.sign;
        }
        if (std::abs(f.lu(k, k)) < pivot_floor) {
            f.singular = true;
            continue;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            f.lu(i, k) /= f.lu(k, k);
            const double lik = f.lu(i, k);
            if (lik == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
        }
    }
    return f;
}

}  // namespace detail

/// Solves M X = rhs by LU with partial pivoting.
inline Mat lu_solve(const Mat& m, const Mat& rhs) {
    if (m.rows() != m.cols())
        throw validation_error("lu_solve: matrix is not square");
    if (rhs.rows() != m.rows())
        throw validation_error("lu_solve: right-hand side row count mismatch");
    const std::size_t n = m.rows();
    if (n == 0) return Mat(0, rhs.cols());

    detail::LuFactors f = detail::lu_factor(m);
    if (f.singular) throw validation_error("lu_solve: singular system");

    Mat x(n, rhs.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < rhs.cols(); ++j) x(i, j) = rhs(f.piv[i], j);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t i = 1; i < n; ++i) {
            double s = x(i, j);
            for (std::size_t k = 0; k < i; ++k) s -= f.lu(i, k) * x(k, j);
            x(i, j) = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = x(ii, j);
            for (std::size_t k = ii + 1; k < n; ++k) s -= f.lu(ii, k) * x(k, j);
            x(ii, j) = s / f.lu(ii, ii);
        }
    }
    return x;
}

/// Determinant via LU. Returns 0 for a numerically singular matrix instead
/// of throwing, so it can be used as a smallness measure.
inline double lu_det(const Mat& m) {
    if (m.rows() != m.cols())
        throw validation_error("lu_det: matrix is not square");
    if (m.rows() == 0) return 1.0;
    detail::LuFactors f = detail::lu_factor(m);
    double d = f.sign;
    for (std::size_t k = 0; k < m.rows(); ++k) d *= f.lu(k, k);
    return std::isfinite(d) ? d : 0.0;
}

/// Orthonormal basis of the orthogonal complement of the column space of K
/// (m x p, full column rank) in R^m; the result is m x (m-p). For p = 0 the
/// complement is the whole space and the identity is returned.
inline Mat orth_complement(const Mat& k) {
    const std::size_t m = k.rows();
    const std::size_t p = k.cols();
    if (p == 0) return Mat::identity(m);
    if (p > m) throw validation_error("orth_complement: more columns than rows");

    const Mat ktk = k.transpose() * k;
    const EigResult g = sym_eig(ktk);
    const double lam_max = std::abs(g.values.back());
    if (g.values.front() <= 1e-10 * lam_max)
        throw validation_error("orth_complement: rank-deficient input");
    if (p == m) return Mat(m, 0);

    // Eigenvectors of the projector I - K (K^T K)^{-1} K^T with eigenvalue 1
    // span the complement; eigenvalues split cleanly into {0, 1}.
    const Mat proj = Mat::identity(m) - k * lu_solve(ktk, k.transpose());
    const EigResult e = sym_eig(proj);
    Mat out(m, m - p);
    std::size_t jout = 0;
    for (std::size_t j = 0; j < m; ++j) {
        if (e.values[j] > 0.5) {
            if (jout == m - p) throw validation_error("orth_complement: projector rank mismatch");
            out.set_col(jout++, e.vectors.col(j));
        }
    }
    if (jout != m - p) throw validation_error("orth_complement: projector rank mismatch");
    return out;
}

/// Modified Gram-Schmidt with a second pass. Throws if the columns are not
/// linearly independent at working precision.
inline Mat orthonormalize_columns(const Mat& a) {
    Mat q = a;
    const std::size_t p = q.cols();
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < p; ++j) {
            auto vj = q.col(j);
            for (std::size_t i = 0; i < j; ++i) {
                const auto vi = q.col(i);
                double dot = 0.0;
                for (std::size_t r = 0; r < vj.size(); ++r) dot += vi[r] * vj[r];
                for (std::size_t r = 0; r < vj.size(); ++r) vj[r] -= dot * vi[r];
            }
            double nrm = 0.0;
            for (double x : vj) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm < 1e-12)
                throw validation_error("orthonormalize_columns: rank-deficient input");
            for (double& x : vj) x /= nrm;
            q.set_col(j, vj);
        }
    }
    return q;
}

}  // namespace relaxcouple
