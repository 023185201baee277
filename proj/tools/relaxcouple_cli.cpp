// Command-line driver: derives interface coupling conditions, samples the
// admissibility determinant, runs the convergence/profile/stability
// experiments and writes CSV (exact) plus SVG (best-effort) reports.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relaxcouple/relaxcouple.hpp"

namespace rc = relaxcouple;

namespace {

struct ModelOpts {
    std::string model = "carleman";
    int M = 5;
    int max_M = 15;
    double v = 1.0;
    double rho_star = 0.5;
    double eps = 1e-3;
    std::string file;
};

void add_model_flags(CLI::App* sc, ModelOpts& mo) {
    sc->add_option("--model", mo.model, "System: carleman, grad, or file")
        ->check(CLI::IsMember({"carleman", "grad", "file"}));
    sc->add_option("--M", mo.M, "Moment order for --model grad (odd, >= 3)");
    sc->add_option("--max-M", mo.max_M, "Raise the guard cap on the moment order");
    sc->add_option("--v", mo.v, "Transport speed for --model carleman");
    sc->add_option("--rho-star", mo.rho_star, "Linearization density for --model carleman");
    sc->add_option("--eps", mo.eps, "Relaxation time on x > 0");
    sc->add_option("--file", mo.file, "System file (JSON) for --model file");
}

rc::RelaxationSystem make_model(const ModelOpts& mo) {
    if (mo.model == "carleman") return rc::carleman(mo.v, mo.rho_star, mo.eps);
    if (mo.model == "grad") return rc::grad_moment(mo.M, mo.eps, mo.max_M);
    if (mo.file.empty())
        throw rc::validation_error("--model file requires --file PATH");
    rc::RelaxationSystem sys = rc::load_system(mo.file);
    sys.eps_right = mo.eps;
    return sys;
}

std::pair<double, double> parse_range(const std::string& s, const char* what) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw rc::validation_error(std::string(what) + " must be given as lo,hi");
    try {
        const double lo = std::stod(s.substr(0, comma));
        const double hi = std::stod(s.substr(comma + 1));
        return {lo, hi};
    } catch (const std::exception&) {
        throw rc::validation_error(std::string(what) + " must be given as lo,hi");
    }
}

// Domain defaults track the bundled experiments: the kinetic two-speed model
// runs on [-0.4, 0.4], the moment chain on [-2*pi, 2*pi].
std::pair<double, double> default_domain(const ModelOpts& mo) {
    if (mo.model == "grad") return {-2.0 * M_PI, 2.0 * M_PI};
    return {-0.4, 0.4};
}

int run_app(int argc, char** argv) {
    CLI::App app{
        "Interface coupling conditions and coupled solvers for linear hyperbolic "
        "relaxation systems with a piecewise relaxation time"};
    app.require_subcommand(1);

    // ---- derive ----
    ModelOpts derive_mo;
    auto* sc_derive = app.add_subcommand(
        "derive", "Derive and print the interface coupling matrices");
    add_model_flags(sc_derive, derive_mo);
    int derive_trials = 100;
    sc_derive->add_option("--trials", derive_trials,
                          "Random traces for the relation check");

    // ---- gkc-check ----
    ModelOpts gkc_mo;
    auto* sc_gkc = app.add_subcommand(
        "gkc-check", "Sample |det(B R_M^S(xi,eta))| over a (xi,eta) grid");
    add_model_flags(sc_gkc, gkc_mo);
    std::string gkc_b = "r-plus";
    std::string gkc_b_file;
    int xi_lo = -6, xi_hi = 6, eta_hi = 20;
    std::string gkc_out;
    sc_gkc->add_option("--b", gkc_b, "Boundary matrix: r-plus, r-minus, or file")
        ->check(CLI::IsMember({"r-plus", "r-minus", "file"}));
    sc_gkc->add_option("--b-file", gkc_b_file, "CSV file with the boundary matrix rows");
    sc_gkc->add_option("--xi-exp-lo", xi_lo, "Smallest xi as a power of two");
    sc_gkc->add_option("--xi-exp-hi", xi_hi, "Largest xi as a power of two");
    sc_gkc->add_option("--eta-exp-hi", eta_hi, "Largest eta as a power of two");
    sc_gkc->add_option("--out", gkc_out, "CSV output path");

    // ---- convergence-eps ----
    ModelOpts ceps_mo;
    auto* sc_ceps = app.add_subcommand(
        "convergence-eps",
        "Error of the coupled solution against stiff references for shrinking "
        "relaxation times");
    add_model_flags(sc_ceps, ceps_mo);
    std::vector<double> ceps_list{8e-4, 4e-4, 2e-4, 1e-4};
    double ceps_dx = 1e-5, ceps_cfl = 0.67, ceps_tend = 0.2;
    double ceps_dd_dx = 1e-3, ceps_dd_cfl = 0.17;
    int ceps_k = 2;
    std::string ceps_window = "-0.1,0.1", ceps_domain, ceps_out = "out";
    bool paper_exact = false;
    sc_ceps->add_option("--eps-list", ceps_list, "Relaxation times (constant ratio)");
    sc_ceps->add_option("--dx", ceps_dx, "Reference mesh width");
    sc_ceps->add_option("--cfl", ceps_cfl, "Reference CFL number");
    sc_ceps->add_option("--t-end", ceps_tend, "Final time");
    sc_ceps->add_option("--window", ceps_window, "Error window lo,hi");
    sc_ceps->add_option("--domain", ceps_domain, "Computational domain lo,hi");
    sc_ceps->add_option("--dd-dx", ceps_dd_dx, "Coupled-run mesh width");
    sc_ceps->add_option("--dd-cfl", ceps_dd_cfl, "Coupled-run CFL number");
    sc_ceps->add_option("--k", ceps_k, "Coupled-run polynomial degree");
    sc_ceps->add_option("--out", ceps_out, "Output directory");
    sc_ceps->add_flag("--paper-exact", paper_exact,
                      "Use the fine reference mesh width 4e-6");

    // ---- convergence-dx ----
    ModelOpts cdx_mo;
    cdx_mo.model = "grad";
    auto* sc_cdx = app.add_subcommand(
        "convergence-dx", "Mesh refinement study of the coupled scheme");
    add_model_flags(sc_cdx, cdx_mo);
    std::vector<double> cdx_list;
    double cdx_cfl = 0.17, cdx_tend = 0.5;
    int cdx_k = 2;
    std::string cdx_window, cdx_domain, cdx_out = "out";
    sc_cdx->add_option("--dx-list", cdx_list, "Mesh widths (dyadic)");
    sc_cdx->add_option("--cfl", cdx_cfl, "CFL number");
    sc_cdx->add_option("--t-end", cdx_tend, "Final time");
    sc_cdx->add_option("--k", cdx_k, "Polynomial degree");
    sc_cdx->add_option("--window", cdx_window, "Error window lo,hi");
    sc_cdx->add_option("--domain", cdx_domain, "Computational domain lo,hi");
    sc_cdx->add_option("--out", cdx_out, "Output directory");

    // ---- profile ----
    ModelOpts prof_mo;
    auto* sc_prof = app.add_subcommand(
        "profile", "Overlay the coupled and stiff solutions near the interface");
    add_model_flags(sc_prof, prof_mo);
    double prof_dx = 1e-4, prof_cfl = 0.67, prof_tend = 0.2;
    double prof_dd_dx = 0.0, prof_dd_cfl = 0.17;
    int prof_k = 2, prof_ppc = 4;
    std::string prof_window, prof_domain, prof_out = "out";
    sc_prof->add_option("--dx", prof_dx, "Reference mesh width");
    sc_prof->add_option("--cfl", prof_cfl, "Reference CFL number");
    sc_prof->add_option("--t-end", prof_tend, "Final time");
    sc_prof->add_option("--dd-dx", prof_dd_dx, "Coupled-run mesh width");
    sc_prof->add_option("--dd-cfl", prof_dd_cfl, "Coupled-run CFL number");
    sc_prof->add_option("--k", prof_k, "Coupled-run polynomial degree");
    sc_prof->add_option("--points-per-cell", prof_ppc, "CSV samples per coupled cell");
    sc_prof->add_option("--window", prof_window, "Report window lo,hi");
    sc_prof->add_option("--domain", prof_domain, "Computational domain lo,hi");
    sc_prof->add_option("--out", prof_out, "Output directory");

    // ---- stability ----
    ModelOpts stab_mo;
    auto* sc_stab = app.add_subcommand(
        "stability", "Track weighted and plain L2 norms step by step");
    add_model_flags(sc_stab, stab_mo);
    double stab_tend = 0.5, stab_delta = 0.05, stab_dd_dx = 0.0125, stab_fv_dx = 2e-3;
    std::string stab_domain = "-1,1", stab_out = "out";
    int stab_k = 2;
    sc_stab->add_option("--t-end", stab_tend, "Final time");
    sc_stab->add_option("--delta", stab_delta, "Weight on incoming characteristics");
    sc_stab->add_option("--dd-dx", stab_dd_dx, "Coupled-run mesh width");
    sc_stab->add_option("--dx", stab_fv_dx, "Stiff-run mesh width");
    sc_stab->add_option("--k", stab_k, "Coupled-run polynomial degree");
    sc_stab->add_option("--domain", stab_domain, "Computational domain lo,hi");
    sc_stab->add_option("--out", stab_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    if (sc_derive->parsed()) {
        const rc::DeriveResult r = rc::cmd_derive(make_model(derive_mo), derive_trials);
        rc::print_derive(std::cout, r);
        return r.relation_residual <= 1e-9 ? 0 : 1;
    }

    if (sc_gkc->parsed()) {
        rc::GkcCheckConfig cfg;
        cfg.sys = make_model(gkc_mo);
        cfg.xi_grid.clear();
        for (int k = xi_lo; k <= xi_hi; ++k) cfg.xi_grid.push_back(std::ldexp(1.0, k));
        cfg.eta_grid = {0.0};
        for (int k = -6; k <= eta_hi; ++k) cfg.eta_grid.push_back(std::ldexp(1.0, k));
        if (gkc_b == "r-minus") cfg.select = rc::BoundarySelect::RMinus;
        if (gkc_b == "file") {
            if (gkc_b_file.empty())
                throw rc::validation_error("--b file requires --b-file PATH");
            // One CSV row per boundary condition.
            std::ifstream in(gkc_b_file);
            if (!in) throw rc::io_error("cannot open " + gkc_b_file);
            std::vector<std::vector<double>> rows;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::vector<double> row;
                std::stringstream ls(line);
                std::string cell;
                while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
                rows.push_back(std::move(row));
            }
            if (rows.empty()) throw rc::validation_error("boundary matrix file is empty");
            rc::Mat b(rows.size(), rows[0].size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != rows[0].size())
                    throw rc::validation_error("boundary matrix rows have unequal length");
                for (std::size_t j = 0; j < rows[i].size(); ++j) b(i, j) = rows[i][j];
            }
            cfg.boundary = b;
        }
        cfg.out_csv = gkc_out;
        const rc::GkcSampleResult res = rc::cmd_gkc_check(cfg);
        std::printf("min |det| = %.6e at xi=%g eta=%g over %zu samples\n",
                    res.min_abs_det, res.argmin_xi, res.argmin_eta, res.rows.size());
        return 0;
    }

    if (sc_ceps->parsed()) {
        rc::ConvergenceEpsConfig cfg;
        cfg.base = make_model(ceps_mo);
        cfg.eps_list = ceps_list;
        cfg.dx_ref = paper_exact ? 4e-6 : ceps_dx;
        cfg.cfl_ref = ceps_cfl;
        cfg.t_end = ceps_tend;
        std::tie(cfg.w_lo, cfg.w_hi) = parse_range(ceps_window, "--window");
        const auto dom = ceps_domain.empty() ? default_domain(ceps_mo)
                                             : parse_range(ceps_domain, "--domain");
        cfg.x_left = dom.first;
        cfg.x_right = dom.second;
        cfg.dd_dx = ceps_dd_dx;
        cfg.dd_cfl = ceps_dd_cfl;
        cfg.dd_k = ceps_k;
        const rc::ExperimentReport rep = rc::cmd_convergence_eps(cfg);
        std::filesystem::create_directories(ceps_out);
        rep.save_csv(ceps_out + "/convergence_eps.csv");
        rep.write_csv(std::cout);
        return 0;
    }

    if (sc_cdx->parsed()) {
        rc::ConvergenceDxConfig cfg;
        cfg.sys = make_model(cdx_mo);
        cfg.dx_list = cdx_list;
        if (cfg.dx_list.empty())
            for (int d = 10; d <= 160; d *= 2) cfg.dx_list.push_back(M_PI / d);
        cfg.k = cdx_k;
        cfg.cfl = cdx_cfl;
        cfg.t_end = cdx_tend;
        const auto dom = cdx_domain.empty() ? default_domain(cdx_mo)
                                            : parse_range(cdx_domain, "--domain");
        cfg.x_left = dom.first;
        cfg.x_right = dom.second;
        if (!cdx_window.empty())
            std::tie(cfg.w_lo, cfg.w_hi) = parse_range(cdx_window, "--window");
        const rc::ExperimentReport rep = rc::cmd_convergence_dx(cfg);
        std::filesystem::create_directories(cdx_out);
        rep.save_csv(cdx_out + "/convergence_dx.csv");
        rep.write_csv(std::cout);
        return 0;
    }

    if (sc_prof->parsed()) {
        rc::ProfileConfig cfg;
        cfg.sys = make_model(prof_mo);
        const auto dom = prof_domain.empty() ? default_domain(prof_mo)
                                             : parse_range(prof_domain, "--domain");
        cfg.x_left = dom.first;
        cfg.x_right = dom.second;
        if (prof_window.empty()) {
            cfg.w_lo = prof_mo.model == "grad" ? -1.0 : -0.1;
            cfg.w_hi = -cfg.w_lo;
        } else {
            std::tie(cfg.w_lo, cfg.w_hi) = parse_range(prof_window, "--window");
        }
        cfg.t_end = prof_tend;
        cfg.dx_ref = prof_dx;
        cfg.cfl_ref = prof_cfl;
        cfg.dd_dx = prof_dd_dx > 0.0 ? prof_dd_dx
                                     : (prof_mo.model == "grad" ? M_PI / 80.0 : 1e-3);
        cfg.dd_cfl = prof_dd_cfl;
        cfg.dd_k = prof_k;
        cfg.points_per_cell = prof_ppc;
        cfg.physical_moments = prof_mo.model == "grad";
        cfg.out_dir = prof_out;
        const rc::ProfileResult res = rc::cmd_profile(cfg);
        for (const auto& p : res.csv_paths) std::printf("wrote %s\n", p.c_str());
        for (const auto& p : res.svg_paths) std::printf("wrote %s\n", p.c_str());
        return 0;
    }

    if (sc_stab->parsed()) {
        rc::StabilityConfig cfg;
        cfg.sys = make_model(stab_mo);
        std::tie(cfg.x_left, cfg.x_right) = parse_range(stab_domain, "--domain");
        cfg.t_end = stab_tend;
        cfg.delta = stab_delta;
        cfg.dd_dx = stab_dd_dx;
        cfg.dd_k = stab_k;
        cfg.fv_dx = stab_fv_dx;
        cfg.out_dir = stab_out;
        const rc::StabilityResult res = rc::cmd_stability(cfg);
        std::printf("coupled run: weighted growth %.6g, plain L2 growth %.6g\n",
                    res.dg_weighted_growth, res.dg_l2_growth);
        std::printf("stiff run:   max per-step L2 ratio %.12g\n", res.fv_max_step_ratio);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const rc::instability_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const rc::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const rc::validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
