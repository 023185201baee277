#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "relaxcouple/fv.hpp"
#include "relaxcouple/models.hpp"
#include "relaxcouple/experiments.hpp"
#include "relaxcouple/norms.hpp"

using namespace relaxcouple;

TEST_CASE("constant equilibrium data is preserved away from the ends", "[fv]") {
    const RelaxationSystem sys = carleman(1.0, 0.5, 1.0);
    const Grid grid = make_grid(-1.0, 1.0, 100, 100);
    const FVState st = run_reference(sys, grid, 0.5, 0.3,
                                     [](double, std::span<double> out) {
                                         out[0] = 0.7;
                                         out[1] = 0.0;
                                     });
    // The numerical dependence cone grows one cell per step, i.e. at speed
    // dx/dt = 1/cfl: cells within |x| < 1 - 0.3/0.5 stay untouched.
    for (int i = 0; i < st.ncells; ++i) {
        if (std::abs(st.cell_center(i)) > 0.35) continue;
        REQUIRE(st.u[static_cast<std::size_t>(i) * 2] == Catch::Approx(0.7).margin(1e-13));
        REQUIRE(st.u[static_cast<std::size_t>(i) * 2 + 1] ==
                Catch::Approx(0.0).margin(1e-13));
    }
}

TEST_CASE("relaxed block decays like the source exponential", "[fv][oracle]") {
    // Spatially uniform data: advection cancels pointwise, so each side
    // relaxes with its own time constant. Probe points are chosen outside
    // the numerical dependence cones of the interface and the outer ends.
    const RelaxationSystem sys = carleman(1.0, 0.5, 0.1);
    const Grid grid = make_grid(-1.0, 1.0, 200, 200);
    const double t_end = 0.2;
    const FVState st = run_reference(sys, grid, 0.67, t_end,
                                     [](double, std::span<double> out) {
                                         out[0] = 0.0;
                                         out[1] = 1.0;
                                     });
    std::vector<double> left(2), right(2);
    eval_fv(st, -0.65, std::span<double>(left));
    eval_fv(st, 0.65, std::span<double>(right));
    REQUIRE(left[1] == Catch::Approx(std::exp(-t_end)).epsilon(0.02));
    REQUIRE(right[1] == Catch::Approx(std::exp(-t_end / 0.1)).epsilon(0.1));
}

TEST_CASE("discrete L2 norm never grows for the stiff problem", "[fv][stability]") {
    std::mt19937 rng(53u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const RelaxationSystem& sys : {carleman(1.0, 0.5, 1e-2), grad_moment(5, 1e-2)}) {
        const int n = sys.n;
        std::vector<double> amp(n), phase(n);
        for (int c = 0; c < n; ++c) {
            amp[c] = dist(rng);
            phase[c] = dist(rng);
        }
        auto init = [&](double x, std::span<double> out) {
            const double cutoff =
                std::abs(x) < 0.8 ? std::exp(-1.0 / (1.0 - (x / 0.8) * (x / 0.8))) : 0.0;
            for (int c = 0; c < n; ++c)
                out[c] = amp[c] * std::sin(3.0 * x + phase[c]) * cutoff;
        };
        const Grid grid = make_grid(-1.0, 1.0, 250, 250);
        double prev = -1.0, worst = 0.0;
        run_reference(sys, grid, 0.67, 0.3, init, [&](const FVState& s) {
            const double l = s.l2_norm();
            if (prev > 0.0) worst = std::max(worst, l / prev);
            prev = l;
            return true;
        });
        REQUIRE(worst <= 1.0 + 1e-12);
    }
}

TEST_CASE("flux differencing conserves the totals", "[fv][property]") {
    // Compact bump, negligible source: every component total is constant
    // while the support stays away from the ends. The equilibrium components
    // carry no source at all, so their totals are exact for any S.
    const Mat a(2, 2, {0.0, -1.0, -1.0, 0.0});
    const RelaxationSystem sys = build_system(2, 1, a, Mat(1, 1, {-1e-11}), 1.0);
    const Grid grid = make_grid(-1.0, 1.0, 200, 200);
    auto init = [](double x, std::span<double> out) {
        const double s = x / 0.4;
        const double b = std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
        out[0] = b;
        out[1] = -0.3 * b;
    };
    auto totals = [](const FVState& s) {
        std::vector<double> t(2, 0.0);
        for (int i = 0; i < s.ncells; ++i)
            for (int c = 0; c < 2; ++c)
                t[c] += s.u[static_cast<std::size_t>(i) * 2 + c] * s.dx;
        return t;
    };
    const auto t0 = totals(run_reference(sys, grid, 0.67, 0.0, init));
    const auto t1 = totals(run_reference(sys, grid, 0.67, 0.3, init));
    REQUIRE(t1[0] == Catch::Approx(t0[0]).margin(1e-10));
    REQUIRE(t1[1] == Catch::Approx(t0[1]).margin(1e-10));
}

TEST_CASE("blown CFL raises an instability error", "[fv]") {
    const RelaxationSystem sys = carleman(1.0, 0.5, 1.0);
    const Grid grid = make_grid(-1.0, 1.0, 50, 50);
    REQUIRE_THROWS_AS(run_reference(sys, grid, 5.0, 100.0, default_initial(sys)),
                      instability_error);
}

TEST_CASE("reference mesh must be uniform across the interface", "[fv]") {
    const RelaxationSystem sys = carleman(1.0, 0.5);
    REQUIRE_THROWS_AS(
        run_reference(sys, make_grid(-1.0, 1.0, 10, 20), 0.5, 0.1, default_initial(sys)),
        validation_error);
}

TEST_CASE("l2_error closed-form oracle", "[norms][oracle]") {
    SolutionSampler sine = [](double x, std::span<double> out) { out[0] = std::sin(x); };
    SolutionSampler zero = [](double, std::span<double> out) { out[0] = 0.0; };
    const auto same = l2_error(sine, sine, 0.0, 2.0 * M_PI, 1);
    REQUIRE(same[0] == 0.0);
    // || sin ||_{L2(0, 2pi)} = sqrt(pi).
    const auto err = l2_error(sine, zero, 0.0, 2.0 * M_PI, 1, 20000);
    REQUIRE(err[0] == Catch::Approx(std::sqrt(M_PI)).margin(1e-6));

    REQUIRE_THROWS_AS(l2_error(sine, zero, 1.0, 1.0, 1), validation_error);
}

TEST_CASE("fv sampler returns the covering cell average", "[fv]") {
    FVState st;
    st.ncomp = 1;
    st.ncells = 4;
    st.x_left = 0.0;
    st.dx = 0.25;
    st.u = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> v(1);
    eval_fv(st, 0.1, std::span<double>(v));
    REQUIRE(v[0] == 1.0);
    eval_fv(st, 0.8, std::span<double>(v));
    REQUIRE(v[0] == 4.0);
    eval_fv(st, 2.0, std::span<double>(v));  // clamped to the last cell
    REQUIRE(v[0] == 4.0);
}
