// Pseudo-minimizer branch: the map, its remainder, the anchor inversion,
// the contraction fixed point, and the uniqueness comparison. The cheap
// N = 1 cubic line (sech anchor) exercises most contracts; one N = 2 point
// cross-validates the two routes.
#include <gtest/gtest.h>

#include "fracgs/continuation.hpp"
#include "fracgs/verify/oracles.hpp"

using namespace fracgs;

namespace {

const ContinuationContext& line_ctx() { // N = 1, p = 3
    static ContinuationContext ctx =
        make_continuation_context(solve_local(ProblemSpec{make_grid(1, 1024, 40.0), 1.0, 3.0}));
    return ctx;
}

const ContinuationContext& plane_ctx() { // N = 2, p = 2
    static ContinuationContext ctx =
        make_continuation_context(solve_local(ProblemSpec{make_grid(2, 256, 24.0), 1.0, 2.0}));
    return ctx;
}

} // namespace

TEST(PhiMap, VanishesAtTheAnchor) {
    const ContinuationContext& ctx = line_ctx();
    RealField zero(ctx.grid());
    RealField f = phi_map(ctx, zero, 1.0, ctx.nu1());
    EXPECT_LT(sobolev_norm(f, 1.0), 1e-8);
}

TEST(PhiMap, FrechetDerivative) {
    const ContinuationContext& ctx = line_ctx();
    const double s = 0.95;
    GroundState direct = solve_ground_state(ProblemSpec{ctx.grid(), s, ctx.p()});
    RealField w = detail::radialize(random_smooth_field(ctx.grid(), 5));
    RealField zero(ctx.grid());
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        RealField we = eps * w;
        RealField dphi = phi_map(ctx, we, s, direct.nu) - phi_map(ctx, zero, s, direct.nu);
        RealField lin = phi_prime0_apply(ctx, we, s, direct.nu);
        RealField err = dphi - lin;
        const double rel = sobolev_norm(err, s) / (eps * sobolev_norm(w, s));
        EXPECT_LT(rel, prev); // O(eps)
        prev = rel;
    }
    EXPECT_LT(prev, 1e-5);
}

TEST(Remainder, QuadraticScalingAndTwoRoutes) {
    const ContinuationContext& ctx = line_ctx();
    const double s = 0.95, nu = ctx.nu1();
    RealField zero(ctx.grid());
    RealField q0 = q_remainder(ctx, zero, s, nu);
    EXPECT_LT(sobolev_norm(q0, s), 1e-12);

    RealField w = detail::radialize(random_smooth_field(ctx.grid(), 7));
    RealField q1 = q_remainder(ctx, 0.02 * w, s, nu);
    RealField q2 = q_remainder(ctx, 0.01 * w, s, nu);
    // min(2, p) = 2 for p = 3: halving omega quarters the remainder
    EXPECT_NEAR(sobolev_norm(q1, s) / sobolev_norm(q2, s), 4.0, 0.15);

    RealField qn = nemytskii_remainder(ctx, 0.02 * w, s, nu);
    RealField gap = q1 - qn;
    EXPECT_LT(sobolev_norm(gap, s), 1e-8 * sobolev_norm(q1, s));
}

TEST(Remainder, LipschitzOnSmallBalls) {
    const ContinuationContext& ctx = line_ctx();
    const double s = 0.95, nu = ctx.nu1();
    Rng rng(3);
    RealField w1 = detail::radialize(random_smooth_field(ctx.grid(), 11));
    RealField w2 = detail::radialize(random_smooth_field(ctx.grid(), 12));
    for (int trial = 0; trial < 5; ++trial) {
        const double a = 0.2 * rng.uniform(), b = 0.2 * rng.uniform();
        RealField o1 = a * w1, o2 = b * w2;
        RealField dq = q_remainder(ctx, o1, s, nu) - q_remainder(ctx, o2, s, nu);
        RealField dw = o1 - o2;
        const double lip = sobolev_norm(dq, s) / std::max(1e-14, sobolev_norm(dw, s));
        // Lipschitz constant proportional to the ball radius
        EXPECT_LT(lip, 3.0 * (sobolev_norm(o1, s) + sobolev_norm(o2, s) + 0.05));
    }
}

TEST(Inversion, RoundTripAndBound) {
    const ContinuationContext& ctx = line_ctx();
    const double s = 0.95, nu = ctx.nu1();
    RealField zero(ctx.grid());
    EXPECT_LT(sobolev_norm(invert_linearized_at_anchor(ctx, zero, s, nu), s), 1e-12);

    RealField g = detail::radialize(random_smooth_field(ctx.grid(), 19));
    RealField img = phi_prime0_apply(ctx, g, s, nu);
    InversionStats st;
    RealField back = invert_linearized_at_anchor(ctx, img, s, nu, &st);
    RealField err = back - g;
    EXPECT_LT(sobolev_norm(err, s) / sobolev_norm(g, s), 1e-8);
    EXPECT_LT(st.relative_residual, 1e-10);

    // inverse-norm estimates bounded across the near-1 range
    double worst = 0.0;
    for (double sp : {0.8, 0.9, 0.95}) {
        GroundState d = solve_ground_state(ProblemSpec{ctx.grid(), sp, ctx.p()});
        RealField f = detail::radialize(random_smooth_field(ctx.grid(), 23));
        InversionStats stats;
        invert_linearized_at_anchor(ctx, f, sp, d.nu, &stats);
        worst = std::max(worst, stats.inverse_norm_ratio);
    }
    EXPECT_LT(worst, 50.0); // common bound, recorded diagnostic
    EXPECT_THROW(invert_linearized_at_anchor(ctx, spectral_derivative(ctx.anchor.u, 0), s, nu),
                 std::invalid_argument); // non-radial input
}

TEST(BranchStep, TrivialAtSOne) {
    const ContinuationContext& ctx = line_ctx();
    BranchPoint pt = branch_step(ctx, 1.0, ctx.nu1());
    EXPECT_LT(pt.omega_norm, 1e-8);
    EXPECT_TRUE(pt.ball_ok);
}

TEST(BranchStep, ColdAndWarmAgreeAndRandomInitIsSafe) {
    const ContinuationContext& ctx = line_ctx();
    const double s = 0.96;
    GroundState direct = solve_ground_state(ProblemSpec{ctx.grid(), s, ctx.p()});
    BranchPoint cold = branch_step(ctx, s, direct.nu);
    EXPECT_LT(cold.contraction_rate, 1.0);
    EXPECT_LT(cold.fixed_point_residual, 1e-10);

    RealField warm_seed = 0.5 * cold.omega;
    BranchPoint warm = branch_step(ctx, s, direct.nu, &warm_seed);
    RealField gap = warm.omega - cold.omega;
    EXPECT_LT(sobolev_norm(gap, s), 1e-9);

    // a wild initial guess either lands on the same point or reports divergence
    RealField wild = 10.0 * detail::radialize(random_smooth_field(ctx.grid(), 77));
    try {
        BranchPoint pt = branch_step(ctx, s, direct.nu, &wild);
        RealField d = pt.omega - cold.omega;
        EXPECT_LT(sobolev_norm(d, s), 1e-8);
    } catch (const BranchDiverged&) {
        SUCCEED();
    }
}

TEST(Branch, TraceWithUniquenessLine) {
    const ContinuationContext& ctx = line_ctx();
    std::map<double, GroundState> cache;
    auto nu_of = [&](double s) {
        auto it = cache.find(s);
        if (it == cache.end())
            it = cache.emplace(s, s == 1.0 ? ctx.anchor
                                           : solve_ground_state(ProblemSpec{ctx.grid(), s, ctx.p()}))
                     .first;
        return it->second.nu;
    };
    Branch br = trace_branch(ctx, {1.0, 0.98, 0.96, 0.94}, nu_of);
    ASSERT_EQ(br.points.size(), 4u);
    EXPECT_FALSE(br.stopped_early);
    for (const auto& pt : br.points) {
        EXPECT_TRUE(pt.ball_ok);
        if (pt.s < 1.0) EXPECT_LT(pt.contraction_rate, 1.0);
    }
    EXPECT_GT(br.r0_estimate, 0.0);
    EXPECT_LT(br.r0_estimate, 10.0);

    UniquenessReport rep = uniqueness_test(ctx, cache.at(0.94), br.points.back(), 1e-4);
    EXPECT_TRUE(rep.pass);

    // translated direct solution still passes after recentering
    GroundState shifted = cache.at(0.94);
    RealField moved(shifted.problem.grid);
    const GridSpec& g = shifted.problem.grid;
    for (int i = 0; i < g.points; ++i) moved.values[(i + 3) % g.points] = shifted.u.values[i];
    shifted.u = moved;
    UniquenessReport rep2 = uniqueness_test(ctx, shifted, br.points.back(), 1e-4);
    EXPECT_TRUE(rep2.pass);

    // mismatched parameters are rejected
    EXPECT_THROW(uniqueness_test(ctx, cache.at(0.96), br.points.back(), 1e-4), std::invalid_argument);
}

TEST(BranchStep, ContractionCertificateOverRandomPairs) {
    // the fixed-point map G(w) = -inv{Phi(0) + Q(w)} is a contraction on the
    // ball: sampled Lipschitz ratios stay below one
    const ContinuationContext& ctx = line_ctx();
    const double s = 0.96;
    GroundState direct = solve_ground_state(ProblemSpec{ctx.grid(), s, ctx.p()});
    BranchPoint pt = branch_step(ctx, s, direct.nu);
    const double ball = 10.0 * pt.alpha;
    RealField phi0 = phi_map(ctx, RealField(ctx.grid()), s, direct.nu);
    auto G = [&](const RealField& w) {
        RealField q = q_remainder(ctx, w, s, direct.nu);
        RealField rhs = phi0 + q;
        RealField img = invert_linearized_at_anchor(ctx, rhs, s, direct.nu);
        return -1.0 * img;
    };
    Rng rng(5);
    for (int trial = 0; trial < 4; ++trial) {
        RealField a = detail::radialize(random_smooth_field(ctx.grid(), 300 + trial));
        RealField b = detail::radialize(random_smooth_field(ctx.grid(), 400 + trial));
        a = (ball * rng.uniform()) * a;
        b = (ball * rng.uniform()) * b;
        RealField dG = G(a) - G(b);
        RealField dw = a - b;
        const double lip = sobolev_norm(dG, s) / std::max(1e-14, sobolev_norm(dw, s));
        EXPECT_LT(lip, 1.0);
    }
}

TEST(Branch, SingleTrivialPointAndGracefulFailure) {
    const ContinuationContext& ctx = line_ctx();
    auto nu_of = [&](double s) {
        return s == 1.0 ? ctx.nu1() : solve_ground_state(ProblemSpec{ctx.grid(), s, ctx.p()}).nu;
    };
    Branch single = trace_branch(ctx, {1.0}, nu_of);
    ASSERT_EQ(single.points.size(), 1u);
    EXPECT_LT(single.points[0].omega_norm, 1e-8);

    // a deliberately small s ends the branch without crashing
    Branch partial = trace_branch(ctx, {1.0, 0.95, 0.30}, nu_of);
    EXPECT_LE(partial.points.size(), 3u);
    if (partial.points.size() < 3u) {
        EXPECT_TRUE(partial.stopped_early);
        EXPECT_FALSE(partial.stop_reason.empty());
    }
    EXPECT_THROW(trace_branch(ctx, {0.9, 0.95}, nu_of), std::invalid_argument); // not decreasing
}

TEST(Branch, PlanarTwoRouteConsistency) {
    const ContinuationContext& ctx = plane_ctx();
    const double s = 0.95;
    GroundState direct = solve_ground_state(ProblemSpec{ctx.grid(), s, ctx.p()});
    BranchPoint pt = branch_step(ctx, s, direct.nu);
    EXPECT_LT(pt.contraction_rate, 1.0);
    UniquenessReport rep = uniqueness_test(ctx, direct, pt, 1e-4);
    EXPECT_TRUE(rep.pass);
    EXPECT_LT(rep.linf_gap, 1e-5);
    EXPECT_TRUE(pt.ball_ok);
}
