#pragma once

#include <functional>
#include <span>
#include <vector>

#include "relaxcouple/dg.hpp"
#include "relaxcouple/fv.hpp"

namespace relaxcouple {

/// Evaluates all components of a solution at a point.
using SolutionSampler = std::function<void(double x, std::span<double> out)>;

/// Per-component L2 distance between two samplers over [w_lo, w_hi] by the
/// composite midpoint rule with `samples` uniform points (at least 10^4).
inline std::vector<double> l2_error(const SolutionSampler& a, const SolutionSampler& b,
                                    double w_lo, double w_hi, int ncomp,
                                    int samples = 20000) {
    if (!(w_hi > w_lo)) throw validation_error("l2_error: empty window");
    samples = std::max(samples, 10000);
    const double h = (w_hi - w_lo) / samples;
    std::vector<double> va(ncomp), vb(ncomp), acc(ncomp, 0.0);
    for (int i = 0; i < samples; ++i) {
        const double x = w_lo + (i + 0.5) * h;
        a(x, std::span<double>(va.data(), ncomp));
        b(x, std::span<double>(vb.data(), ncomp));
        for (int c = 0; c < ncomp; ++c) {
            const double d = va[c] - vb[c];
            acc[c] += d * d;
        }
    }
    for (double& s : acc) s = std::sqrt(s * h);
    return acc;
}

/// Full-state sampler for a coupled run: the equilibrium side is padded with
/// zeros in the relaxed components.
inline SolutionSampler make_dd_sampler(const DGState& s, const Grid& grid, int n, int m) {
    return [&s, grid, n, m](double x, std::span<double> out) {
        if (x <= 0.0) {
            eval_left(s, grid, x, out);
        } else {
            eval_right(s, grid, x, out.subspan(0, static_cast<std::size_t>(n - m)));
            for (int c = n - m; c < n; ++c) out[c] = 0.0;
        }
    };
}

inline SolutionSampler make_fv_sampler(const FVState& st) {
    return [&st](double x, std::span<double> out) { eval_fv(st, x, out); };
}

}  // namespace relaxcouple
