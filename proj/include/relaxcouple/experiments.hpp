#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "relaxcouple/coupling.hpp"
#include "relaxcouple/dg.hpp"
#include "relaxcouple/fv.hpp"
#include "relaxcouple/gkc.hpp"
#include "relaxcouple/models.hpp"
#include "relaxcouple/norms.hpp"
#include "relaxcouple/report.hpp"
#include "relaxcouple/svg.hpp"

namespace relaxcouple {

/// Sweep parallelism cap: RELAXCOUPLE_THREADS if set, else the hardware
/// concurrency.
inline int sweep_thread_cap() {
    if (const char* env = std::getenv("RELAXCOUPLE_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

/// Runs fn(0..count-1) on up to sweep_thread_cap() workers. The first
/// exception wins and is rethrown after all workers finish.
template <class F>
void parallel_for_indices(int count, F&& fn) {
    const int nthreads = std::min(sweep_thread_cap(), count);
    if (nthreads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Model-aware smooth initial data used by the bundled experiments:
/// equilibrium data with the density riding on a sine.
inline InitFn default_initial(const RelaxationSystem& sys) {
    const int n = sys.n;
    if (n == 2 && sys.m == 1) {
        return [](double x, std::span<double> out) {
            out[0] = std::sin(x) + 1.0;
            out[1] = 0.0;
        };
    }
    if (n >= 4 && sys.m == n - 3) {
        // Moment chain: (rho, w, theta) = (sin(2x)+1.1, 0, sqrt(2)), higher
        // moments zero; theta enters the state divided by sqrt(2).
        return [n](double x, std::span<double> out) {
            for (int c = 0; c < n; ++c) out[c] = 0.0;
            out[0] = std::sin(2.0 * x) + 1.1;
            out[2] = 1.0;
        };
    }
    return [n](double x, std::span<double> out) {
        for (int c = 0; c < n; ++c) out[c] = 0.0;
        out[0] = std::sin(x) + 1.0;
    };
}

// ---------------------------------------------------------------------------
// derive
// ---------------------------------------------------------------------------

struct DeriveResult {
    SignCounts counts;
    LayerData layer;
    CouplingMatrices cm;
    double relation_residual = 0.0;
};

inline DeriveResult cmd_derive(const RelaxationSystem& sys, int trials = 100) {
    const CharBasis cb = char_decomp(sys);
    const EquilBasis eb = equil_decomp(sys);
    const SignCounts sc = sign_counts(sys);
    DeriveResult r;
    r.counts = sc;
    r.layer = layer_data_with_manifold(sys, eb, sc);
    r.cm = solve_coupling(sys, cb, eb, r.layer, sc);
    r.relation_residual =
        coupling_relation_residual(sys, cb, eb, r.layer, r.cm, trials);
    return r;
}

inline void print_matrix_block(std::ostream& os, const std::string& label, const Mat& m) {
    os << "# " << label << " (" << m.rows() << "x" << m.cols() << ")\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ",";
            os << fmt_double(m(i, j));
        }
        os << "\n";
    }
}

inline void print_derive(std::ostream& os, const DeriveResult& r, double tol = 1e-9) {
    os << "# sign_counts\n";
    os << "n_plus,n_minus,n1_plus,n1_minus,n1_zero\n";
    os << r.counts.n_plus << "," << r.counts.n_minus << "," << r.counts.n1_plus << ","
       << r.counts.n1_minus << "," << r.counts.n1_zero << "\n";
    print_matrix_block(os, "K", r.layer.K);
    print_matrix_block(os, "K_tilde", r.layer.K_tilde);
    print_matrix_block(os, "X", r.layer.X);
    print_matrix_block(os, "N", r.layer.N);
    print_matrix_block(os, "R_S", r.layer.R_S);
    print_matrix_block(os, "B_ll", r.cm.B_ll);
    print_matrix_block(os, "B_lr", r.cm.B_lr);
    print_matrix_block(os, "B_rr", r.cm.B_rr);
    print_matrix_block(os, "B_rl", r.cm.B_rl);
    os << "# coupling_check\n";
    os << "relations_max_residual," << fmt_double(r.relation_residual) << "\n";
    os << "status," << (r.relation_residual <= tol ? "PASS" : "FAIL") << "\n";
}

// ---------------------------------------------------------------------------
// convergence in the relaxation time
// ---------------------------------------------------------------------------

struct ConvergenceEpsConfig {
    RelaxationSystem base;                              // eps_right set per run
    std::vector<double> eps_list{8e-4, 4e-4, 2e-4, 1e-4};
    double dx_ref = 1e-5;                               // 4e-6 in paper-exact mode
    double cfl_ref = 0.67;
    double x_left = -0.4, x_right = 0.4;
    double t_end = 0.2;
    double w_lo = -0.1, w_hi = 0.1;
    int dd_k = 2;
    double dd_dx = 1e-3;
    double dd_cfl = 0.17;
    InitFn init;                                        // defaults per model
    std::vector<std::string> names;                     // defaults per model
};

/// Stiff reference runs for each relaxation time against one coupled run;
/// per-component L2 errors on the window and the observed orders in eps.
inline ExperimentReport cmd_convergence_eps(ConvergenceEpsConfig cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    if (cfg.eps_list.empty())
        throw validation_error("convergence_eps: needs at least one relaxation time");
    double ratio = 2.0;
    if (cfg.eps_list.size() > 1) {
        ratio = cfg.eps_list[0] / cfg.eps_list[1];
        for (std::size_t i = 1; i + 1 < cfg.eps_list.size(); ++i) {
            const double r = cfg.eps_list[i] / cfg.eps_list[i + 1];
            if (!(ratio > 1.0) || std::abs(r - ratio) > 1e-9 * ratio)
                throw validation_error(
                    "convergence_eps: eps list must decrease by a constant ratio");
        }
    }
    if (!cfg.init) cfg.init = default_initial(cfg.base);
    if (cfg.names.empty()) cfg.names = component_names(cfg.base);

    // One coupled run; it does not depend on the relaxation time.
    const Grid dd_grid = make_grid_dx(cfg.x_left, cfg.x_right, cfg.dd_dx);
    const CouplingMatrices cm = solve_coupling(cfg.base);
    const DGState dd =
        run_dd(cfg.base, cm, dd_grid, cfg.dd_k, cfg.dd_cfl, cfg.t_end, cfg.init);
    const SolutionSampler dd_sampler =
        make_dd_sampler(dd, dd_grid, cfg.base.n, cfg.base.m);

    const Grid ref_grid = make_grid_dx(cfg.x_left, cfg.x_right, cfg.dx_ref);
    std::vector<std::vector<double>> errs(cfg.eps_list.size());
    parallel_for_indices(static_cast<int>(cfg.eps_list.size()), [&](int i) {
        RelaxationSystem sys = cfg.base;
        sys.eps_right = cfg.eps_list[i];
        const FVState ref =
            run_reference(sys, ref_grid, cfg.cfl_ref, cfg.t_end, cfg.init);
        errs[i] = l2_error(make_fv_sampler(ref), dd_sampler, cfg.w_lo, cfg.w_hi,
                           cfg.base.n);
    });

    ExperimentReport rep;
    rep.name = "convergence_eps";
    for (int c = 0; c < cfg.base.n; ++c) {
        std::vector<double> comp_errs;
        for (const auto& e : errs) comp_errs.push_back(e[c]);
        const auto orders = observed_orders(comp_errs, ratio);
        for (std::size_t i = 0; i < cfg.eps_list.size(); ++i)
            rep.rows.push_back(
                {cfg.eps_list[i], cfg.names[c], comp_errs[i], orders[i]});
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    rep.metadata = {{"experiment", rep.name},
                    {"dx_ref", fmt_double(cfg.dx_ref)},
                    {"cfl_ref", fmt_double(cfg.cfl_ref)},
                    {"dd_dx", fmt_double(cfg.dd_dx)},
                    {"dd_k", std::to_string(cfg.dd_k)},
                    {"t_end", fmt_double(cfg.t_end)},
                    {"window", fmt_double(cfg.w_lo) + ":" + fmt_double(cfg.w_hi)},
                    {"wall_time_s", fmt_double(wall)}};
    return rep;
}

// ---------------------------------------------------------------------------
// convergence in the mesh width
// ---------------------------------------------------------------------------

struct ConvergenceDxConfig {
    RelaxationSystem sys;
    std::vector<double> dx_list;  // dyadic
    int k = 2;
    double cfl = 0.17;
    double x_left = -2.0 * M_PI, x_right = 2.0 * M_PI;
    double t_end = 0.5;
    double w_lo = -2.0 * M_PI / 3.0, w_hi = 2.0 * M_PI / 3.0;
    InitFn init;
};

/// Mesh refinement study of the coupled scheme against a self-computed
/// reference on a mesh twice finer than the finest entry. Left and right
/// domain solutions are reported separately as vector L2 errors.
inline ExperimentReport cmd_convergence_dx(ConvergenceDxConfig cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    if (cfg.dx_list.empty())
        throw validation_error("convergence_dx: needs at least one mesh width");
    for (std::size_t i = 0; i + 1 < cfg.dx_list.size(); ++i)
        if (std::abs(cfg.dx_list[i] / cfg.dx_list[i + 1] - 2.0) > 1e-9)
            throw validation_error("convergence_dx: dx list must be dyadic");
    if (!cfg.init) cfg.init = default_initial(cfg.sys);

    const CouplingMatrices cm = solve_coupling(cfg.sys);
    const int nruns = static_cast<int>(cfg.dx_list.size());
    std::vector<DGState> states(nruns + 1);
    std::vector<Grid> grids(nruns + 1);
    std::vector<double> all_dx = cfg.dx_list;
    all_dx.push_back(cfg.dx_list.back() / 2.0);  // reference mesh

    parallel_for_indices(nruns + 1, [&](int i) {
        grids[i] = make_grid_dx(cfg.x_left, cfg.x_right, all_dx[i]);
        states[i] =
            run_dd(cfg.sys, cm, grids[i], cfg.k, cfg.cfl, cfg.t_end, cfg.init);
    });

    const int n = cfg.sys.n, m = cfg.sys.m;
    auto left_sampler = [&](int i) {
        return [&, i](double x, std::span<double> out) {
            eval_left(states[i], grids[i], x, out);
        };
    };
    auto right_sampler = [&](int i) {
        return [&, i](double x, std::span<double> out) {
            eval_right(states[i], grids[i], x, out);
        };
    };

    std::vector<double> err_left(nruns), err_right(nruns);
    for (int i = 0; i < nruns; ++i) {
        const auto el = l2_error(left_sampler(i), left_sampler(nruns), cfg.w_lo,
                                 std::min(0.0, cfg.w_hi), n);
        const auto er = l2_error(right_sampler(i), right_sampler(nruns),
                                 std::max(0.0, cfg.w_lo), cfg.w_hi, n - m);
        double sl = 0.0, sr = 0.0;
        for (double e : el) sl += e * e;
        for (double e : er) sr += e * e;
        err_left[i] = std::sqrt(sl);
        err_right[i] = std::sqrt(sr);
    }

    ExperimentReport rep;
    rep.name = "convergence_dx";
    const auto ol = observed_orders(err_left, 2.0);
    const auto orr = observed_orders(err_right, 2.0);
    for (int i = 0; i < nruns; ++i)
        rep.rows.push_back({cfg.dx_list[i], "U_l", err_left[i], ol[i]});
    for (int i = 0; i < nruns; ++i)
        rep.rows.push_back({cfg.dx_list[i], "u_r", err_right[i], orr[i]});
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    rep.metadata = {{"experiment", rep.name},
                    {"k", std::to_string(cfg.k)},
                    {"cfl", fmt_double(cfg.cfl)},
                    {"t_end", fmt_double(cfg.t_end)},
                    {"window", fmt_double(cfg.w_lo) + ":" + fmt_double(cfg.w_hi)},
                    {"reference_dx", fmt_double(all_dx.back())},
                    {"wall_time_s", fmt_double(wall)}};
    return rep;
}

// ---------------------------------------------------------------------------
// solution profiles
// ---------------------------------------------------------------------------

struct ProfileConfig {
    RelaxationSystem sys;  // eps_right is the profiled relaxation time
    double x_left = -0.4, x_right = 0.4;
    double t_end = 0.2;
    double w_lo = -0.1, w_hi = 0.1;
    double dx_ref = 1e-4;
    double cfl_ref = 0.67;
    int dd_k = 2;
    double dd_dx = 1e-3;
    double dd_cfl = 0.17;
    int points_per_cell = 4;  // coupled-run CSV resolution
    InitFn init;
    std::vector<std::string> names;
    std::string out_dir = "out";
    bool physical_moments = true;  // convert moment states for reporting
};

struct ProfileResult {
    std::vector<std::string> csv_paths;
    std::vector<std::string> svg_paths;
};

/// Overlays the coupled solution and the stiff reference on a window and
/// writes one CSV per solution plus one SVG per component.
inline ProfileResult cmd_profile(ProfileConfig cfg) {
    if (!cfg.init) cfg.init = default_initial(cfg.sys);
    if (cfg.names.empty()) cfg.names = component_names(cfg.sys);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + cfg.out_dir);

    const bool moments = cfg.physical_moments && cfg.sys.n >= 4 &&
                         cfg.sys.m == cfg.sys.n - 3;
    const std::optional<MomentConvention> conv =
        moments ? std::optional<MomentConvention>(MomentConvention(cfg.sys.n - 1))
                : std::nullopt;
    auto to_report_vars = [&](const std::vector<double>& v) {
        return conv ? conv->to_physical(v) : v;
    };

    const CouplingMatrices cm = solve_coupling(cfg.sys);
    const Grid dd_grid = make_grid_dx(cfg.x_left, cfg.x_right, cfg.dd_dx);
    const DGState dd =
        run_dd(cfg.sys, cm, dd_grid, cfg.dd_k, cfg.dd_cfl, cfg.t_end, cfg.init);
    const Grid ref_grid = make_grid_dx(cfg.x_left, cfg.x_right, cfg.dx_ref);
    const FVState ref =
        run_reference(cfg.sys, ref_grid, cfg.cfl_ref, cfg.t_end, cfg.init);

    ProfileResult out;
    const int n = cfg.sys.n;
    const SolutionSampler dd_sampler = make_dd_sampler(dd, dd_grid, n, cfg.sys.m);

    // Coupled solution sampled at uniform points per cell inside the window.
    std::vector<double> dd_x;
    {
        auto add_side = [&](double x0, double dx, int ncells) {
            for (int i = 0; i < ncells; ++i)
                for (int p = 0; p < cfg.points_per_cell; ++p) {
                    const double x = x0 + (i + (p + 0.5) / cfg.points_per_cell) * dx;
                    if (x >= cfg.w_lo && x <= cfg.w_hi) dd_x.push_back(x);
                }
        };
        add_side(dd_grid.x_left, dd_grid.dx_left(), dd_grid.n_cells_left);
        add_side(0.0, dd_grid.dx_right(), dd_grid.n_cells_right);
    }
    std::vector<double> ref_x;
    for (int i = 0; i < ref.ncells; ++i) {
        const double x = ref.cell_center(i);
        if (x >= cfg.w_lo && x <= cfg.w_hi) ref_x.push_back(x);
    }

    auto write_profile_csv = [&](const std::string& path, const std::vector<double>& xs,
                                 const SolutionSampler& sampler) {
        std::ofstream os(path);
        if (!os) throw io_error("cannot write " + path);
        os << "x";
        for (const auto& nm : cfg.names) os << "," << nm;
        os << "\n";
        std::vector<double> v(n);
        for (double x : xs) {
            sampler(x, std::span<double>(v.data(), n));
            const auto w = to_report_vars(v);
            os << fmt_double(x);
            for (double y : w) os << "," << fmt_double(y);
            os << "\n";
        }
        out.csv_paths.push_back(path);
    };
    write_profile_csv(cfg.out_dir + "/profile_dd.csv", dd_x, dd_sampler);
    write_profile_csv(cfg.out_dir + "/profile_ref.csv", ref_x, make_fv_sampler(ref));

    // One chart per component with both curves.
    std::vector<double> v(n);
    for (int c = 0; c < n; ++c) {
        svg::Series s_ref{"reference", {}, {}, "#d62728", ""};
        svg::Series s_dd{"coupled", {}, {}, "#1f77b4", "6,4"};
        for (double x : ref_x) {
            eval_fv(ref, x, std::span<double>(v.data(), n));
            s_ref.x.push_back(x);
            s_ref.y.push_back(to_report_vars(v)[c]);
        }
        for (double x : dd_x) {
            dd_sampler(x, std::span<double>(v.data(), n));
            s_dd.x.push_back(x);
            s_dd.y.push_back(to_report_vars(v)[c]);
        }
        const std::string path = cfg.out_dir + "/profile_" + cfg.names[c] + ".svg";
        svg::write_line_chart(path, cfg.names[c] + " at t=" + fmt_double(cfg.t_end), "x",
                              cfg.names[c], {s_ref, s_dd});
        out.svg_paths.push_back(path);
    }
    return out;
}

// ---------------------------------------------------------------------------
// stability monitoring
// ---------------------------------------------------------------------------

struct StabilityConfig {
    RelaxationSystem sys;
    double x_left = -1.0, x_right = 1.0;
    double t_end = 0.5;
    double delta = 0.05;
    int dd_k = 2;
    double dd_dx = 0.0125;
    double dd_cfl = 0.17;
    double fv_dx = 2e-3;
    double fv_cfl = 0.67;
    InitFn init;
    std::string out_dir;  // empty: no CSV output
};

struct StabilityResult {
    double dg_weighted_growth = 0.0;   // max weighted norm over initial
    double dg_l2_growth = 0.0;
    double fv_max_step_ratio = 0.0;    // max per-step L2 ratio of the stiff run
    std::vector<std::array<double, 3>> dg_series;  // t, weighted, l2
    std::vector<std::array<double, 2>> fv_series;  // t, l2
};

/// Tracks the characteristic-weighted norm of the coupled run and the plain
/// L2 norm of the stiff run step by step.
inline StabilityResult cmd_stability(StabilityConfig cfg) {
    if (!cfg.init) cfg.init = default_initial(cfg.sys);
    StabilityResult res;

    const CharBasis cb = char_decomp(cfg.sys);
    const EquilBasis eb = equil_decomp(cfg.sys);
    const CouplingMatrices cm = solve_coupling(cfg.sys);
    const Grid dd_grid = make_grid_dx(cfg.x_left, cfg.x_right, cfg.dd_dx);

    double w0 = -1.0, l0 = -1.0;
    run_dd(cfg.sys, cm, dd_grid, cfg.dd_k, cfg.dd_cfl, cfg.t_end, cfg.init,
           [&](const DGState& s) {
               const double w = std::sqrt(weighted_l2_sq(s, dd_grid, cb, eb, cfg.delta));
               const double l = std::sqrt(weighted_l2_sq(s, dd_grid, cb, eb, 1.0));
               if (w0 < 0.0) {
                   w0 = w;
                   l0 = l;
               }
               res.dg_series.push_back({s.time, w, l});
               if (w0 > 0.0) res.dg_weighted_growth = std::max(res.dg_weighted_growth, w / w0);
               if (l0 > 0.0) res.dg_l2_growth = std::max(res.dg_l2_growth, l / l0);
               return true;
           });

    const Grid fv_grid = make_grid_dx(cfg.x_left, cfg.x_right, cfg.fv_dx);
    double prev = -1.0;
    run_reference(cfg.sys, fv_grid, cfg.fv_cfl, cfg.t_end, cfg.init,
                  [&](const FVState& s) {
                      const double l = s.l2_norm();
                      res.fv_series.push_back({s.time, l});
                      if (prev > 0.0)
                          res.fv_max_step_ratio = std::max(res.fv_max_step_ratio, l / prev);
                      prev = l;
                      return true;
                  });

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        if (ec) throw io_error("cannot create output directory " + cfg.out_dir);
        {
            std::ofstream os(cfg.out_dir + "/stability_dg.csv");
            if (!os) throw io_error("cannot write stability_dg.csv");
            os << "t,weighted_l2,l2\n";
            for (const auto& r : res.dg_series)
                os << fmt_double(r[0]) << "," << fmt_double(r[1]) << "," << fmt_double(r[2])
                   << "\n";
        }
        {
            std::ofstream os(cfg.out_dir + "/stability_fv.csv");
            if (!os) throw io_error("cannot write stability_fv.csv");
            os << "t,l2\n";
            for (const auto& r : res.fv_series)
                os << fmt_double(r[0]) << "," << fmt_double(r[1]) << "\n";
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// admissibility sampling
// ---------------------------------------------------------------------------

enum class BoundarySelect { RPlus, RMinus };

struct GkcCheckConfig {
    RelaxationSystem sys;
    std::optional<Mat> boundary;  // overrides the selection below
    BoundarySelect select = BoundarySelect::RPlus;
    std::vector<double> xi_grid = default_xi_grid();
    std::vector<double> eta_grid = default_eta_grid();
    std::string out_csv;  // empty: no file output
};

inline GkcSampleResult cmd_gkc_check(const GkcCheckConfig& cfg) {
    Mat b;
    if (cfg.boundary) {
        b = *cfg.boundary;
    } else {
        const CharBasis cb = char_decomp(cfg.sys);
        b = (cfg.select == BoundarySelect::RPlus) ? cb.R_plus.transpose()
                                                  : cb.R_minus.transpose();
    }
    const GkcSampleResult res =
        gkc_sample(cfg.sys, BoundaryMatrix::make(b), cfg.xi_grid, cfg.eta_grid);
    if (!cfg.out_csv.empty()) {
        std::ofstream os(cfg.out_csv);
        if (!os) throw io_error("cannot write " + cfg.out_csv);
        os << "xi,eta,abs_det\n";
        for (const auto& r : res.rows)
            os << fmt_double(r.xi) << "," << fmt_double(r.eta) << ","
               << fmt_double(r.abs_det) << "\n";
    }
    return res;
}

}  // namespace relaxcouple
