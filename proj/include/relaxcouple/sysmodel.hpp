#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "relaxcouple/matkernels.hpp"
#include "relaxcouple/matrix.hpp"

namespace relaxcouple {

/// Linear hyperbolic relaxation system U_t + A U_x = Q U / eps(x) with
/// Q = diag(0, S), symmetric A, S negative definite, invertible A. The
/// relaxation time is 1 on x <= 0 and eps_right on x > 0.
struct RelaxationSystem {
    int n = 0;         // state dimension
    int m = 0;         // relaxed block dimension, 0 < m < n
    Mat A;             // n x n, symmetric
    Mat S;             // m x m, symmetric negative definite
    double eps_right = 1.0;
};

struct SignCounts {
    int n_plus = 0, n_minus = 0;                     // eigenvalue signs of A
    int n1_plus = 0, n1_minus = 0, n1_zero = 0;      // eigenvalue signs of A11
};

inline std::vector<std::string> system_violations(int n, int m, const Mat& A,
                                                  const Mat& S, double eps_right) {
    std::vector<std::string> bad;
    auto fail = [&](const std::string& msg) { bad.push_back(msg); };

    if (n <= 0 || m <= 0 || m >= n) fail("dimensions must satisfy 0 < m < n");
    if (A.rows() != static_cast<std::size_t>(n) || A.cols() != static_cast<std::size_t>(n))
        fail("A must be n x n");
    if (S.rows() != static_cast<std::size_t>(m) || S.cols() != static_cast<std::size_t>(m))
        fail("S must be m x m");
    if (!(eps_right > 0.0)) fail("eps_right must be positive");
    if (!A.all_finite() || !S.all_finite()) fail("matrix entries must be finite");
    if (!bad.empty()) return bad;

    const double asym = max_abs_diff(A, A.transpose());
    if (asym > 1e-12 * std::max(1.0, A.max_abs())) {
        std::ostringstream os;
        os << "A not symmetric (max asymmetry " << asym << ")";
        fail(os.str());
    }
    const double s_asym = max_abs_diff(S, S.transpose());
    if (s_asym > 1e-12 * std::max(1.0, S.max_abs())) {
        std::ostringstream os;
        os << "S not symmetric (max asymmetry " << s_asym << ")";
        fail(os.str());
    }
    if (!bad.empty()) return bad;

    const EigResult es = sym_eig(S);
    if (es.values.back() >= -1e-12) {
        std::ostringstream os;
        os << "S not negative definite (largest eigenvalue " << es.values.back() << ")";
        fail(os.str());
    }

    const EigResult ea = sym_eig(A);
    double amin = std::abs(ea.values.front());
    double amax = 0.0;
    for (double lam : ea.values) {
        amin = std::min(amin, std::abs(lam));
        amax = std::max(amax, std::abs(lam));
    }
    if (amin <= 1e-10 * amax) {
        std::ostringstream os;
        os << "characteristic interface: A has eigenvalue " << amin
           << " below threshold " << 1e-10 * amax;
        fail(os.str());
    }
    return bad;
}

inline SignCounts sign_counts(const RelaxationSystem& sys, double tol = 1e-10);

inline RelaxationSystem build_system(int n, int m, const Mat& A, const Mat& S,
                                     double eps_right) {
    const auto bad = system_violations(n, m, A, S, eps_right);
    if (!bad.empty()) {
        std::string msg = "invalid relaxation system:";
        for (const auto& b : bad) msg += "\n  - " + b;
        throw validation_error(msg);
    }
    RelaxationSystem sys{n, m, A, S, eps_right};
    sign_counts(sys, 1e-10);  // eigenvalue bookkeeping must add up
    return sys;
}

struct SystemBlocks {
    Mat A11;  // (n-m) x (n-m)
    Mat A12;  // (n-m) x m
    Mat A22;  // m x m
};

inline SystemBlocks blocks(const RelaxationSystem& sys) {
    const std::size_t nm = static_cast<std::size_t>(sys.n - sys.m);
    const std::size_t m = static_cast<std::size_t>(sys.m);
    return {sys.A.block(0, 0, nm, nm), sys.A.block(0, nm, nm, m),
            sys.A.block(nm, nm, m, m)};
}

/// Q = diag(0, S) as a full n x n matrix.
inline Mat source_matrix(const RelaxationSystem& sys) {
    Mat q(sys.n, sys.n);
    q.set_block(sys.n - sys.m, sys.n - sys.m, sys.S);
    return q;
}

inline SignCounts sign_counts(const RelaxationSystem& sys, double tol) {
    SignCounts c;
    const EigResult ea = sym_eig(sys.A);
    double amax = 0.0;
    for (double lam : ea.values) amax = std::max(amax, std::abs(lam));
    for (double lam : ea.values) (lam > 0.0 ? c.n_plus : c.n_minus)++;

    const Mat a11 = blocks(sys).A11;
    const EigResult e1 = sym_eig(a11);
    double a1max = 0.0;
    for (double lam : e1.values) a1max = std::max(a1max, std::abs(lam));
    const double zthr = tol * a1max;
    for (double lam : e1.values) {
        if (std::abs(lam) <= zthr)
            c.n1_zero++;
        else if (lam > 0.0)
            c.n1_plus++;
        else
            c.n1_minus++;
    }

    if (c.n_plus + c.n_minus != sys.n ||
        c.n1_plus + c.n1_minus + c.n1_zero != sys.n - sys.m)
        throw validation_error("sign_counts: eigenvalue bookkeeping failed");
    return c;
}

}  // namespace relaxcouple
