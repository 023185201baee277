#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "relaxcouple/gkc.hpp"
#include "relaxcouple/models.hpp"

using namespace relaxcouple;

TEST_CASE("boundary matrix validation", "[gkc]") {
    REQUIRE_NOTHROW(BoundaryMatrix::make(Mat(1, 2, {1.0, 0.0})));
    REQUIRE_THROWS_AS(BoundaryMatrix::make(Mat(2, 2, {1.0, 0.0, 1.0, 0.0})),
                      validation_error);
}

TEST_CASE("outgoing eigenrows are strictly dissipative", "[gkc]") {
    for (const RelaxationSystem& sys :
         {carleman(1.0, 0.5), grad_moment(3), grad_moment(5), grad_moment(7)}) {
        const CharBasis cb = char_decomp(sys);
        const auto c = strict_dissipative(BoundaryMatrix::make(cb.R_plus.transpose()),
                                          sys.A);
        REQUIRE(c.has_value());
        REQUIRE(*c > 0.0);
    }
}

TEST_CASE("incoming eigenrows are not dissipative", "[gkc]") {
    const RelaxationSystem sys = carleman(1.0, 0.5);
    const CharBasis cb = char_decomp(sys);
    REQUIRE_FALSE(
        strict_dissipative(BoundaryMatrix::make(cb.R_minus.transpose()), sys.A));
}

TEST_CASE("the full identity is dissipative for any flux matrix", "[gkc]") {
    std::mt19937 rng(19u);
    for (int n : {2, 3, 5}) {
        const Mat a = oracles::random_symmetric(n, rng);
        REQUIRE(strict_dissipative(BoundaryMatrix::make(Mat::identity(n)), a));
    }
}

TEST_CASE("stable subspace at eta=0 spans the outgoing eigenvectors", "[gkc]") {
    const RelaxationSystem carl = carleman(1.0, 0.5);
    const CharBasis cb = char_decomp(carl);
    const Mat rs = right_stable(carl, 1.0, 0.0);
    REQUIRE(rs.cols() == 1);
    REQUIRE(max_principal_angle(rs, cb.R_plus) < 1e-12);
    // Direction (1,-1) up to scaling.
    REQUIRE(rs(0, 0) == Catch::Approx(-rs(1, 0)));

    REQUIRE_THROWS_AS(right_stable(carl, 0.0, 1.0), validation_error);
    REQUIRE_THROWS_AS(right_stable(carl, -1.0, 0.0), validation_error);
}

TEST_CASE("stable subspace dimension is constant over the grid", "[gkc][property]") {
    for (const RelaxationSystem& sys : {carleman(1.0, 0.5), grad_moment(5)}) {
        const SignCounts sc = sign_counts(sys);
        for (double xi : default_xi_grid())
            for (double eta : {0.0, 1.0, 1024.0, 1048576.0}) {
                const Mat rs = right_stable(sys, xi, eta);
                REQUIRE(rs.cols() == static_cast<std::size_t>(sc.n_plus));
            }
    }
}

TEST_CASE("determinant sampling is basis independent", "[gkc][property]") {
    const RelaxationSystem sys = grad_moment(5);
    const CharBasis cb = char_decomp(sys);
    const Mat b = cb.R_plus.transpose();
    const Mat rs = right_stable(sys, 2.0, 8.0);

    std::mt19937 rng(31u);
    const Mat mix = oracles::random_orthogonal(3, rng) * diag({2.0, 0.5, 1.5});
    const double d0 = std::abs(lu_det(b * orthonormalize_columns(rs)));
    const double d1 = std::abs(lu_det(b * orthonormalize_columns(rs * mix)));
    REQUIRE(d0 == Catch::Approx(d1).margin(1e-10));
}

TEST_CASE("grid minimum of the admissibility determinant", "[gkc]") {
    const RelaxationSystem carl = carleman(1.0, 0.5);
    const CharBasis cb = char_decomp(carl);

    const std::vector<double> xi{0.1, 1.0, 10.0};
    const std::vector<double> eta{0.0, 1.0, 10.0, 100.0};
    const auto plus = gkc_sample(carl, BoundaryMatrix::make(cb.R_plus.transpose()), xi, eta);
    REQUIRE(plus.min_abs_det > 0.1);

    // Rows orthogonal to the stable subspace at eta=0: determinant collapses.
    const auto minus =
        gkc_sample(carl, BoundaryMatrix::make(cb.R_minus.transpose()), xi, eta);
    REQUIRE(minus.min_abs_det == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(minus.argmin_eta == 0.0);
}

TEST_CASE("dissipativity implies a positive determinant minimum over the corpus",
          "[gkc][property]") {
    for (const RelaxationSystem& sys :
         {carleman(1.0, 0.5), grad_moment(3), grad_moment(5), grad_moment(7)}) {
        const CharBasis cb = char_decomp(sys);
        const BoundaryMatrix b = BoundaryMatrix::make(cb.R_plus.transpose());
        REQUIRE(strict_dissipative(b, sys.A).has_value());
        const auto res = gkc_sample(sys, b, default_xi_grid(), default_eta_grid());
        REQUIRE(res.min_abs_det > 1e-3);
    }
}

TEST_CASE("stable subspace approaches the analytic limit", "[gkc]") {
    const RelaxationSystem g5 = grad_moment(5);
    const Mat lim = stable_subspace_limit(g5);
    REQUIRE(lim.cols() == 3);

    // Observed convergence follows an inverse-square-root law in eta with a
    // model-dependent constant (close to 2 here, 1 for the two-speed model).
    const double a6 = max_principal_angle(right_stable(g5, 1.0, 1e6), lim);
    const double a8 = max_principal_angle(right_stable(g5, 1.0, 1e8), lim);
    REQUIRE(a6 < 5e-3);
    REQUIRE(a8 < 5e-4);
    REQUIRE(a6 / a8 == Catch::Approx(10.0).epsilon(0.05));

    const RelaxationSystem carl = carleman(1.0, 0.5);
    const double c6 =
        max_principal_angle(right_stable(carl, 1.0, 1e6), stable_subspace_limit(carl));
    REQUIRE(c6 < 1.1e-3);
}
