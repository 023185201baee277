#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "relaxcouple/coupling.hpp"
#include "relaxcouple/models.hpp"

using namespace relaxcouple;

namespace {

RelaxationSystem random_system(std::mt19937& rng, int n, int m) {
    for (;;) {
        try {
            return build_system(n, m, oracles::random_symmetric(n, rng),
                                -1.0 * oracles::random_spd(m, rng), 1e-3);
        } catch (const validation_error&) {
        }
    }
}

/// Random valid system whose equilibrium block has a zero eigenvalue, so the
/// slow-layer machinery is exercised.
RelaxationSystem random_system_with_zero_group(std::mt19937& rng, int n, int m) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (;;) {
        const int nm = n - m;
        const Mat p = oracles::random_orthogonal(nm, rng);
        std::vector<double> lam(nm);
        for (int i = 0; i < nm; ++i) lam[i] = dist(rng) * 2.0;
        lam[0] = 0.0;
        const Mat a11 = p * diag(lam) * p.transpose();
        Mat a(n, n);
        a.set_block(0, 0, 0.5 * (a11 + a11.transpose()));
        Mat a12(nm, m), a22(m, m);
        for (int i = 0; i < nm; ++i)
            for (int j = 0; j < m; ++j) a12(i, j) = dist(rng);
        a22 = oracles::random_symmetric(m, rng);
        a.set_block(0, nm, a12);
        a.set_block(nm, 0, a12.transpose());
        a.set_block(nm, nm, a22);
        try {
            return build_system(n, m, a, -1.0 * oracles::random_spd(m, rng), 1e-3);
        } catch (const validation_error&) {
        }
    }
}

}  // namespace

TEST_CASE("layer matrices of the two-speed model", "[coupling]") {
    const RelaxationSystem sys = carleman(1.0, 0.5);
    const EquilBasis eb = equil_decomp(sys);
    const LayerData ld = layer_matrices(sys, eb);
    REQUIRE(ld.K.rows() == 1);
    REQUIRE(ld.K(0, 0) == Catch::Approx(-1.0));
    REQUIRE(ld.K_tilde.cols() == 0);
    REQUIRE(ld.N.cols() == 0);
    REQUIRE(ld.X(0, 0) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("layer matrices of the moment chain", "[coupling]") {
    const RelaxationSystem sys = grad_moment(5);
    const EquilBasis eb = equil_decomp(sys);
    const SignCounts sc = sign_counts(sys);
    const LayerData ld = layer_data_with_manifold(sys, eb, sc);

    // K picks out the first relaxed component.
    REQUIRE(ld.K.rows() == 3);
    REQUIRE(ld.K(0, 0) == Catch::Approx(-1.0));
    REQUIRE(ld.K(1, 0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(ld.K(2, 0) == Catch::Approx(0.0).margin(1e-14));

    // K~^T X K~ couples the two highest moments with weight sqrt(5).
    const Mat txk = ld.K_tilde.transpose() * ld.X * ld.K_tilde;
    const double s5 = std::sqrt(5.0);
    REQUIRE(txk(0, 0) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(txk(0, 1) == Catch::Approx(s5));
    REQUIRE(txk(1, 0) == Catch::Approx(s5));
    REQUIRE(txk(1, 1) == Catch::Approx(0.0).margin(1e-12));

    // -K~^T S K~ is the identity; its Cholesky factor as well.
    const Mat tsk = -1.0 * (ld.K_tilde.transpose() * sys.S * ld.K_tilde);
    REQUIRE(max_abs_diff(tsk, Mat::identity(2)) < 1e-13);
    REQUIRE(max_abs_diff(cholesky_spd(tsk), Mat::identity(2)) < 1e-13);

    // N: first column (2sqrt6/3, 0, -2sqrt3/3), second column zero.
    REQUIRE(ld.N(0, 0) == Catch::Approx(2.0 * std::sqrt(6.0) / 3.0));
    REQUIRE(ld.N(1, 0) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(ld.N(2, 0) == Catch::Approx(-2.0 * std::sqrt(3.0) / 3.0));
    for (int i = 0; i < 3; ++i) REQUIRE(ld.N(i, 1) == Catch::Approx(0.0).margin(1e-12));

    // Stable manifold spans (1,1).
    REQUIRE(ld.R_S.cols() == 1);
    REQUIRE(ld.R_S(0, 0) == Catch::Approx(ld.R_S(1, 0)));

    // Orthonormal complement relations hold exactly as specified.
    REQUIRE((ld.K.transpose() * ld.K_tilde).max_abs() <= 1e-12);
    REQUIRE(max_abs_diff(ld.K_tilde.transpose() * ld.K_tilde, Mat::identity(2)) <= 1e-12);
}

TEST_CASE("stable manifold of a diagonal layer problem", "[coupling]") {
    // K~^T X K~ = diag(1,-1) against S = -I: stable basis is e1.
    LayerData ld;
    ld.K = Mat(2, 0);
    ld.K_tilde = Mat::identity(2);
    ld.X = Mat(2, 2, {1.0, 0.0, 0.0, -1.0});
    ld.N = Mat(0, 2);
    const Mat rs = stable_manifold(ld, -1.0 * Mat::identity(2), 1);
    REQUIRE(rs.cols() == 1);
    REQUIRE(rs(0, 0) == Catch::Approx(1.0));
    REQUIRE(rs(1, 0) == Catch::Approx(0.0).margin(1e-13));

    REQUIRE_THROWS_WITH(stable_manifold(ld, -1.0 * Mat::identity(2), 2),
                        Catch::Matchers::ContainsSubstring("dimension mismatch"));
}

TEST_CASE("assembled interface system of the two-speed model", "[coupling]") {
    const RelaxationSystem sys = carleman(1.0, 0.5);
    const CouplingAssembly ca = assemble_coupling(sys);
    const double s = 1.0 / std::sqrt(2.0);
    REQUIRE(ca.lhs.rows() == 2);
    REQUIRE(ca.lhs.cols() == 2);
    REQUIRE(ca.lhs(0, 0) == Catch::Approx(-s));
    REQUIRE(ca.lhs(1, 0) == Catch::Approx(-s));
    REQUIRE(ca.lhs(0, 1) == Catch::Approx(1.0));
    REQUIRE(ca.lhs(1, 1) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("assembled block widths sum to n", "[coupling]") {
    const CouplingAssembly ca = assemble_coupling(grad_moment(5));
    REQUIRE(ca.lhs.rows() == 6);
    REQUIRE(ca.lhs.cols() == 6);
    REQUIRE(ca.rhs_alpha_plus.cols() == 3);
    REQUIRE(ca.rhs_beta_minus.cols() == 1);
    REQUIRE(ca.rhs_beta_zero.cols() == 1);
}

TEST_CASE("two-speed coupling reduces to a reflection", "[coupling]") {
    const CouplingMatrices cm = solve_coupling(carleman(1.0, 0.5));
    REQUIRE(cm.B_ll.rows() == 1);
    REQUIRE(cm.B_ll.cols() == 1);
    REQUIRE(cm.B_ll(0, 0) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(cm.B_lr.cols() == 0);
    REQUIRE(cm.B_rl.rows() == 0);
    REQUIRE(cm.B_rr.rows() == 0);

    // alpha_- = alpha_+ is the same statement as a vanishing second state
    // component at the interface.
    const CharBasis cb = char_decomp(carleman(1.0, 0.5));
    std::mt19937 rng(5u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        const double ap = dist(rng);
        const std::vector<double> am = cm.B_ll * std::vector<double>{ap};
        const double q = cb.R_plus(1, 0) * ap + cb.R_minus(1, 0) * am[0];
        REQUIRE(q == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("moment-chain coupling satisfies the four scalar relations",
          "[coupling][oracle]") {
    const RelaxationSystem sys = grad_moment(5);
    const CharBasis cb = char_decomp(sys);
    const EquilBasis eb = equil_decomp(sys);
    const SignCounts sc = sign_counts(sys);
    const CouplingMatrices cm = solve_coupling(sys);
    const MomentConvention conv(5);

    std::mt19937 rng(13u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double s3 = std::sqrt(3.0), s5 = std::sqrt(5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> ap{dist(rng), dist(rng), dist(rng)};
        const std::vector<double> bm{dist(rng)};
        const std::vector<double> b0{dist(rng)};

        std::vector<double> am = cm.B_ll * ap;
        {
            const auto t = cm.B_lr * bm;
            for (std::size_t i = 0; i < am.size(); ++i) am[i] += t[i];
        }
        std::vector<double> bp = cm.B_rl * ap;
        {
            const auto t = cm.B_rr * bm;
            for (std::size_t i = 0; i < bp.size(); ++i) bp[i] += t[i];
        }

        std::vector<double> ul = cb.R_plus * ap;
        {
            const auto t = cb.R_minus * am;
            for (std::size_t i = 0; i < ul.size(); ++i) ul[i] += t[i];
        }
        std::vector<double> ur(3);
        {
            const auto t1 = eb.P_plus * bp;
            const auto t2 = eb.P_minus * bm;
            const auto t3 = eb.P_zero * b0;
            for (int i = 0; i < 3; ++i) ur[i] = t1[i] + t2[i] + t3[i];
        }

        // Recover physical moments from the scaled states.
        const auto l = conv.to_physical(ul);
        std::vector<double> ur_full(ul.size(), 0.0);
        for (int i = 0; i < 3; ++i) ur_full[i] = ur[i];
        const auto r = conv.to_physical(ur_full);

        const double rho_l = l[0], w_l = l[1], th_l = l[2];
        const double f3 = l[3], f4 = l[4], f5 = l[5];
        const double rho_r = r[0], w_r = r[1], th_r = r[2];

        REQUIRE(rho_l - s3 * w_l + th_l ==
                Catch::Approx(rho_r - s3 * w_r + th_r).margin(1e-9));
        REQUIRE(f3 == Catch::Approx(0.0).margin(1e-9));
        REQUIRE(f4 - s5 * f5 == Catch::Approx(0.0).margin(1e-9));
        REQUIRE(rho_r + s3 * w_r + th_r ==
                Catch::Approx(rho_l + s3 * w_l + th_l).margin(1e-9));
    }
    (void)sc;
}

TEST_CASE("general relation residual is tiny for the bundled models",
          "[coupling][property]") {
    for (int M : {3, 5, 7}) {
        const RelaxationSystem sys = grad_moment(M);
        const CharBasis cb = char_decomp(sys);
        const EquilBasis eb = equil_decomp(sys);
        const SignCounts sc = sign_counts(sys);
        const LayerData ld = layer_data_with_manifold(sys, eb, sc);
        const CouplingMatrices cm = solve_coupling(sys, cb, eb, ld, sc);
        REQUIRE(coupling_relation_residual(sys, cb, eb, ld, cm, 50) < 1e-9);

        // Dimension bookkeeping of the interface system.
        REQUIRE(sc.n_minus + sc.n1_plus + sc.n1_zero +
                    (sc.n_plus - sc.n1_zero - sc.n1_plus) ==
                sys.n);
    }
}

TEST_CASE("random systems without a zero group solve directly",
          "[coupling][property]") {
    std::mt19937 rng(61u);
    int done = 0;
    for (int trial = 0; trial < 40 && done < 10; ++trial) {
        const RelaxationSystem sys = random_system(rng, 4, 2);
        const SignCounts sc = sign_counts(sys);
        if (sc.n1_zero != 0) continue;
        const CharBasis cb = char_decomp(sys);
        const EquilBasis eb = equil_decomp(sys);
        const LayerData ld = layer_data_with_manifold(sys, eb, sc);
        const CouplingMatrices cm = solve_coupling(sys, cb, eb, ld, sc);
        REQUIRE(cm.B_ll.rows() == static_cast<std::size_t>(sc.n_minus));
        REQUIRE(coupling_relation_residual(sys, cb, eb, ld, cm, 20, 100 + trial) < 1e-9);
        ++done;
    }
    REQUIRE(done == 10);
}

TEST_CASE("random systems with a zero group keep the coupling beta0-free",
          "[coupling][property]") {
    std::mt19937 rng(71u);
    int done = 0;
    for (int trial = 0; trial < 60 && done < 8; ++trial) {
        const RelaxationSystem sys = random_system_with_zero_group(rng, 5, 2);
        const SignCounts sc = sign_counts(sys);
        if (sc.n1_zero == 0) continue;
        const CharBasis cb = char_decomp(sys);
        const EquilBasis eb = equil_decomp(sys);
        LayerData ld;
        CouplingMatrices cm;
        try {
            ld = layer_data_with_manifold(sys, eb, sc);
            // solve_coupling throws if the zero-variable response survives.
            cm = solve_coupling(sys, cb, eb, ld, sc);
        } catch (const validation_error&) {
            continue;  // draw violated a rank assumption
        }
        REQUIRE(coupling_relation_residual(sys, cb, eb, ld, cm, 20, 200 + trial) < 1e-9);
        ++done;
    }
    REQUIRE(done >= 5);
}

TEST_CASE("coupling is invariant under rotations inside degenerate eigenspaces",
          "[coupling][property]") {
    // A with a repeated positive eigenvalue; the incoming trace prediction
    // must not depend on the basis chosen inside that eigenspace.
    std::mt19937 rng(83u);
    const Mat q = oracles::random_orthogonal(4, rng);
    const Mat a = q * diag(std::vector<double>{2.0, 2.0, -1.0, -3.0}) * q.transpose();
    const RelaxationSystem sys =
        build_system(4, 2, 0.5 * (a + a.transpose()), -1.0 * oracles::random_spd(2, rng),
                     1e-3);
    const EquilBasis eb = equil_decomp(sys);
    const SignCounts sc = sign_counts(sys);
    const LayerData ld = layer_data_with_manifold(sys, eb, sc);

    CharBasis cb = char_decomp(sys);
    const CouplingMatrices cm0 = solve_coupling(sys, cb, eb, ld, sc);

    // Rotate the two columns of the degenerate eigenvalue-2 pair.
    CharBasis cb2 = cb;
    REQUIRE(cb2.lam_plus.size() == 2);
    REQUIRE(cb2.lam_plus[0] == Catch::Approx(cb2.lam_plus[1]));
    const double ang = 0.7;
    const Mat rot(2, 2, {std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang)});
    cb2.R_plus = cb.R_plus * rot;
    const CouplingMatrices cm2 = solve_coupling(sys, cb2, eb, ld, sc);

    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u_trace(4), r_trace(2);
        for (double& x : u_trace) x = dist(rng);
        for (double& x : r_trace) x = dist(rng);

        auto predict = [&](const CharBasis& basis, const CouplingMatrices& cm) {
            const auto ap = basis.R_plus.transpose() * u_trace;
            const auto bm = eb.P_minus.transpose() * r_trace;
            auto am = cm.B_ll * ap;
            const auto t = cm.B_lr * bm;
            for (std::size_t i = 0; i < am.size(); ++i) am[i] += t[i];
            auto incoming = basis.R_minus * am;  // physical incoming part
            auto bp = cm.B_rl * ap;
            const auto t2 = cm.B_rr * bm;
            for (std::size_t i = 0; i < bp.size(); ++i) bp[i] += t2[i];
            const auto right_in = eb.P_plus * bp;
            incoming.insert(incoming.end(), right_in.begin(), right_in.end());
            return incoming;
        };
        const auto p0 = predict(cb, cm0);
        const auto p2 = predict(cb2, cm2);
        for (std::size_t i = 0; i < p0.size(); ++i)
            REQUIRE(p0[i] == Catch::Approx(p2[i]).margin(1e-9));
    }
}

TEST_CASE("coupling is invariant under the choice of the orthonormal complement",
          "[coupling][property]") {
    // Rotate K~ by an orthogonal map and rebuild the layer data; physical
    // trace predictions must agree.
    const RelaxationSystem sys = grad_moment(5);
    const CharBasis cb = char_decomp(sys);
    const EquilBasis eb = equil_decomp(sys);
    const SignCounts sc = sign_counts(sys);

    const LayerData ld0 = layer_data_with_manifold(sys, eb, sc);
    const CouplingMatrices cm0 = solve_coupling(sys, cb, eb, ld0, sc);

    std::mt19937 rng(97u);
    const Mat rot = oracles::random_orthogonal(2, rng);
    const Mat kt2 = ld0.K_tilde * rot;
    LayerData ld2 = layer_matrices(sys, eb, &kt2);
    ld2.R_S = stable_manifold(ld2, sys.S, sc.n_plus - sc.n1_zero - sc.n1_plus);
    const CouplingMatrices cm2 = solve_coupling(sys, cb, eb, ld2, sc);

    // Same basis on both sides, so the raw coupling blocks must agree.
    REQUIRE(max_abs_diff(cm0.B_ll, cm2.B_ll) < 1e-9);
    REQUIRE(max_abs_diff(cm0.B_lr, cm2.B_lr) < 1e-9);
    REQUIRE(max_abs_diff(cm0.B_rl, cm2.B_rl) < 1e-9);
    REQUIRE(max_abs_diff(cm0.B_rr, cm2.B_rr) < 1e-9);
}

TEST_CASE("a system with no incoming characteristics has empty left blocks",
          "[coupling]") {
    // All speeds positive: nothing enters the left domain, and the right
    // problem is driven purely by the full-state trace.
    Mat a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 2.0;
    const RelaxationSystem sys = build_system(2, 1, a, Mat(1, 1, {-1.0}), 1e-3);
    const SignCounts sc = sign_counts(sys);
    REQUIRE(sc.n_minus == 0);
    const CharBasis cb = char_decomp(sys);
    const EquilBasis eb = equil_decomp(sys);
    const LayerData ld = layer_data_with_manifold(sys, eb, sc);
    const CouplingMatrices cm = solve_coupling(sys, cb, eb, ld, sc);
    REQUIRE(cm.B_ll.rows() == 0);
    REQUIRE(cm.B_lr.rows() == 0);
    REQUIRE(cm.B_rl.rows() == 1);
    REQUIRE(cm.B_rr.cols() == 0);
    REQUIRE(coupling_relation_residual(sys, cb, eb, ld, cm, 20) < 1e-9);
}

TEST_CASE("noncharacteristic layer helper", "[coupling]") {
    // Decoupled blocks: trace map vanishes, decay solves A22 D = S.
    Mat a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -2.0;
    const RelaxationSystem diag_sys = build_system(2, 1, a, Mat(1, 1, {-1.0}), 1.0);
    const NoncharLayer nc0 = noncharacteristic_layer(diag_sys);
    REQUIRE(nc0.trace_map.max_abs() == 0.0);
    REQUIRE(nc0.decay(0, 0) == Catch::Approx(0.5));

    // Scalar cross-coupled case evaluated by hand.
    const Mat a2(2, 2, {1.0, 0.3, 0.3, -1.0});
    const RelaxationSystem sys2 = build_system(2, 1, a2, Mat(1, 1, {-1.0}), 1.0);
    const NoncharLayer nc = noncharacteristic_layer(sys2);
    REQUIRE(nc.decay(0, 0) == Catch::Approx(-1.0 / (-1.0 - 0.09)));

    REQUIRE_THROWS_AS(noncharacteristic_layer(grad_moment(5)), validation_error);
}

TEST_CASE("noncharacteristic helper cross-checks the layer trace map",
          "[coupling][property]") {
    std::mt19937 rng(103u);
    int done = 0;
    for (int trial = 0; trial < 30 && done < 8; ++trial) {
        const RelaxationSystem sys = random_system(rng, 4, 2);
        if (sign_counts(sys).n1_zero != 0) continue;
        const EquilBasis eb = equil_decomp(sys);
        const LayerData ld = layer_matrices(sys, eb);
        const NoncharLayer nc = noncharacteristic_layer(sys);
        // With no zero group, K~ is the identity and N is the trace map.
        REQUIRE(max_abs_diff(ld.N, nc.trace_map * ld.K_tilde) < 1e-9);
        ++done;
    }
    REQUIRE(done >= 5);
}
