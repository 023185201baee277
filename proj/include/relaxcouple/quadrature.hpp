#pragma once

#include <cmath>
#include <vector>

#include "relaxcouple/errors.hpp"

namespace relaxcouple {

/// Legendre polynomial P_j(x) on [-1, 1] via the three-term recurrence.
inline double legendre(int j, double x) {
    if (j == 0) return 1.0;
    double pm1 = 1.0, p = x;
    for (int k = 1; k < j; ++k) {
        const double pn = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pn;
    }
    return p;
}

/// Fills out[0..k] with P_0(x) .. P_k(x).
inline void legendre_all(int k, double x, double* out) {
    out[0] = 1.0;
    if (k == 0) return;
    out[1] = x;
    for (int j = 1; j < k; ++j)
        out[j + 1] = ((2.0 * j + 1.0) * x * out[j] - j * out[j - 1]) / (j + 1.0);
}

struct QuadRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre rule with npts nodes, exact for polynomials of degree
/// 2*npts - 1. Nodes by Newton iteration from the Chebyshev initial guess.
inline QuadRule gauss_legendre(int npts) {
    if (npts < 1) throw validation_error("gauss_legendre: need at least one node");
    QuadRule q;
    q.nodes.resize(npts);
    q.weights.resize(npts);
    for (int i = 0; i < npts; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (npts + 0.5));
        for (int it = 0; it < 100; ++it) {
            // Evaluate P_n and its derivative together.
            double pm1 = 1.0, p = x;
            for (int k = 1; k < npts; ++k) {
                const double pn = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
                pm1 = p;
                p = pn;
            }
            const double dp = npts * (x * p - pm1) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double pm1 = 1.0, p = x;
        for (int k = 1; k < npts; ++k) {
            const double pn = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
            pm1 = p;
            p = pn;
        }
        const double dp = npts * (x * p - pm1) / (x * x - 1.0);
        q.nodes[npts - 1 - i] = x;  // ascending
        q.weights[npts - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return q;
}

}  // namespace relaxcouple
