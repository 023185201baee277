#pragma once

#include <vector>

#include "relaxcouple/matkernels.hpp"
#include "relaxcouple/sysmodel.hpp"

namespace relaxcouple {

/// Signed orthonormal eigen-groups of A: columns of R_plus / R_minus carry
/// the positive / negative eigenvalues, ascending within each group.
struct CharBasis {
    Mat R_plus, R_minus;
    std::vector<double> lam_plus, lam_minus;

    int n_plus() const { return static_cast<int>(lam_plus.size()); }
    int n_minus() const { return static_cast<int>(lam_minus.size()); }

    Mat a_plus() const { return R_plus * diag(lam_plus) * R_plus.transpose(); }
    Mat a_minus() const { return R_minus * diag(lam_minus) * R_minus.transpose(); }
};

/// Same split for A11, with the zero group kept separately (columns of
/// P_zero span the kernel of A11).
struct EquilBasis {
    Mat P_plus, P_minus, P_zero;
    std::vector<double> lam1_plus, lam1_minus;

    int n1_plus() const { return static_cast<int>(lam1_plus.size()); }
    int n1_minus() const { return static_cast<int>(lam1_minus.size()); }
    int n1_zero() const { return static_cast<int>(P_zero.cols()); }

    Mat a11_plus() const { return P_plus * diag(lam1_plus) * P_plus.transpose(); }
    Mat a11_minus() const { return P_minus * diag(lam1_minus) * P_minus.transpose(); }
};

inline CharBasis char_decomp(const RelaxationSystem& sys) {
    const EigResult e = sym_eig(sys.A);
    double amax = 0.0;
    for (double lam : e.values) amax = std::max(amax, std::abs(lam));

    CharBasis cb;
    std::vector<std::size_t> plus, minus;
    for (std::size_t j = 0; j < e.values.size(); ++j) {
        if (std::abs(e.values[j]) <= 1e-10 * amax)
            throw validation_error("char_decomp: characteristic interface (A has a zero eigenvalue)");
        (e.values[j] > 0.0 ? plus : minus).push_back(j);
    }
    cb.R_plus = Mat(sys.n, plus.size());
    cb.R_minus = Mat(sys.n, minus.size());
    for (std::size_t j = 0; j < plus.size(); ++j) {
        cb.R_plus.set_col(j, e.vectors.col(plus[j]));
        cb.lam_plus.push_back(e.values[plus[j]]);
    }
    for (std::size_t j = 0; j < minus.size(); ++j) {
        cb.R_minus.set_col(j, e.vectors.col(minus[j]));
        cb.lam_minus.push_back(e.values[minus[j]]);
    }
    return cb;
}

inline EquilBasis equil_decomp(const RelaxationSystem& sys) {
    const Mat a11 = blocks(sys).A11;
    const EigResult e = sym_eig(a11);
    double amax = 0.0;
    for (double lam : e.values) amax = std::max(amax, std::abs(lam));
    const double zthr = 1e-10 * amax;

    EquilBasis eb;
    std::vector<std::size_t> plus, minus, zero;
    for (std::size_t j = 0; j < e.values.size(); ++j) {
        if (std::abs(e.values[j]) <= zthr)
            zero.push_back(j);
        else
            (e.values[j] > 0.0 ? plus : minus).push_back(j);
    }
    const std::size_t nm = a11.rows();
    eb.P_plus = Mat(nm, plus.size());
    eb.P_minus = Mat(nm, minus.size());
    eb.P_zero = Mat(nm, zero.size());
    for (std::size_t j = 0; j < plus.size(); ++j) {
        eb.P_plus.set_col(j, e.vectors.col(plus[j]));
        eb.lam1_plus.push_back(e.values[plus[j]]);
    }
    for (std::size_t j = 0; j < minus.size(); ++j) {
        eb.P_minus.set_col(j, e.vectors.col(minus[j]));
        eb.lam1_minus.push_back(e.values[minus[j]]);
    }
    for (std::size_t j = 0; j < zero.size(); ++j)
        eb.P_zero.set_col(j, e.vectors.col(zero[j]));
    return eb;
}

}  // namespace relaxcouple
