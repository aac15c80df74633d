// Pseudo-minimizer branch near s = 1: the map Phi_s(w) = J_s'(U_1 + w, nu_s)
// seen through the H^s Riesz representative, its quadratic remainder, the
// inversion of Phi_s'(0) on radial fields, and the contraction fixed point
//     w <- -(Phi_s'(0))^{-1} { Phi_s(0) + Q_s(w) },
// whose solution w_s gives the pseudo-minimizer U_1 + w_s. Uniqueness is
// certified by comparing the branch against independently solved ground
// states after recentering.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracgs/ground_state.hpp"
#include "fracgs/krylov.hpp"

namespace fracgs {

// Anchor data: the s = 1 ground state U_1 with nu_1.
struct ContinuationContext {
    GroundState anchor;

    const GridSpec& grid() const { return anchor.problem.grid; }
    double p() const { return anchor.problem.p; }
    double nu1() const { return anchor.nu; }
};

inline ContinuationContext make_continuation_context(GroundState anchor) {
    if (anchor.problem.s != 1.0) throw std::invalid_argument("continuation anchor must have s = 1");
    return ContinuationContext{std::move(anchor)};
}

namespace detail {

// exact radializer used inside the branch iterations (see symmetry.hpp)
inline RealField radialize(const RealField& u) {
    RealField v = apply_symbol(u, [](double) { return 1.0; }); // drop Nyquist rows
    if (u.grid.dims == 1) return parity_part(v, 0, false);
    return lattice_sector_project(v, SectorSpec{0}, 0);
}

inline void require_radial(const RealField& u, const char* who) {
    RealField r = radialize(u);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        diff = std::max(diff, std::abs(u.values[i] - r.values[i]));
        scale = std::max(scale, std::abs(u.values[i]));
    }
    if (diff > 1e-8 * std::max(1.0, scale))
        throw std::invalid_argument(std::string(who) + " expects a radial field");
}

} // namespace detail

// H^s Riesz representative of J_s'(U_1 + w, nu): the inverse metric
// (1 + |xi|^{2s})^{-1} applied to the L2 representative
// (-Dlt)^s v + v - nu v^p, v = U_1 + w.
inline RealField phi_map(const ContinuationContext& ctx, const RealField& omega, double s, double nu) {
    require_order(s);
    const GridSpec& g = ctx.grid();
    RealField v = ctx.anchor.u;
    for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] += omega.values[i];
    RealField el = euler_lagrange_residual(v, nu, s, ctx.p());
    return apply_metric_power(el, s, -1.0);
}

// Phi_s'(0)[w] = B^{-1} (B w - p nu U_1^{p-1} w) = w - B^{-1}(p nu U_1^{p-1} w).
inline RealField phi_prime0_apply(const ContinuationContext& ctx, const RealField& w, double s, double nu) {
    const double p = ctx.p();
    RealField pw(ctx.grid());
    for (std::size_t i = 0; i < pw.values.size(); ++i)
        pw.values[i] = p * nu * std::pow(std::max(ctx.anchor.u.values[i], 0.0), p - 1.0) * w.values[i];
    RealField back = apply_metric_power(pw, s, -1.0);
    RealField out(ctx.grid());
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = w.values[i] - back.values[i];
    return out;
}

// Q_s(w) = Phi_s(w) - Phi_s(0) - Phi_s'(0)[w]; coincides with the Nemytskii
// remainder -nu B^{-1} [ (U_1+w)^p - U_1^p - p U_1^{p-1} w ].
inline RealField q_remainder(const ContinuationContext& ctx, const RealField& omega, double s, double nu) {
    RealField a = phi_map(ctx, omega, s, nu);
    RealField b = phi_map(ctx, RealField(ctx.grid()), s, nu);
    RealField c = phi_prime0_apply(ctx, omega, s, nu);
    RealField out(ctx.grid());
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = a.values[i] - b.values[i] - c.values[i];
    return out;
}

// Direct Nemytskii route, used to cross-check q_remainder.
inline RealField nemytskii_remainder(const ContinuationContext& ctx, const RealField& omega, double s, double nu) {
    const double p = ctx.p();
    RealField nl(ctx.grid());
    for (std::size_t i = 0; i < nl.values.size(); ++i) {
        const double U = ctx.anchor.u.values[i];
        const double v = U + omega.values[i];
        const double vp = (v == 0.0) ? 0.0 : std::copysign(std::pow(std::abs(v), p), v);
        const double Up = std::pow(std::max(U, 0.0), p);
        nl.values[i] = -nu * (vp - Up - p * std::pow(std::max(U, 0.0), p - 1.0) * omega.values[i]);
    }
    return apply_metric_power(nl, s, -1.0);
}

struct InversionStats {
    int iterations = 0;
    double relative_residual = 0.0;
    double inverse_norm_ratio = 0.0; // ||w||_s / ||f||_s
};

// Solve J_s''(U_1, nu_s)[wbar, w] = <f, w>_s over radial w: symmetrize with
// B^{1/2} and run MINRES on the radial sector (the operator there is
// identity minus a compact well, indefinite with a single negative
// direction, so MINRES is the right Krylov method).
inline RealField invert_linearized_at_anchor(const ContinuationContext& ctx, const RealField& f,
                                             double s, double nu, InversionStats* stats = nullptr,
                                             double rel_tol = 1e-10) {
    require_order(s);
    detail::require_radial(f, "invert_linearized_at_anchor");
    const GridSpec& g = ctx.grid();
    const double p = ctx.p();
    RealField V(g);
    for (std::size_t i = 0; i < V.values.size(); ++i)
        V.values[i] = p * nu * std::pow(std::max(ctx.anchor.u.values[i], 0.0), p - 1.0);

    auto sym_apply = [g, s, V](const RealField& in) {
        RealField a = apply_metric_power(in, s, -0.5);
        a = pointwise_mul(V, a);
        a = apply_metric_power(a, s, -0.5);
        RealField out(g);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = in.values[i] - a.values[i];
        return out;
    };

    ApplyFn apply = [g, sym_apply](const Vec& in, Vec& out) {
        RealField phi(g);
        phi.values = in;
        phi = detail::radialize(phi);
        RealField ap = sym_apply(phi);
        ap = detail::radialize(ap);
        out = std::move(ap.values);
    };

    RealField rhs = apply_metric_power(f, s, 0.5);
    rhs = detail::radialize(rhs);
    Vec x;
    auto st = minres(apply, rhs.values, x, rel_tol, 4000);
    if (!st.converged)
        throw std::runtime_error("anchor linearization solve stalled at relative residual " +
                                 std::to_string(st.relative_residual) +
                                 " (operator near-singular for this s)");
    RealField z(g);
    z.values = std::move(x);
    RealField w = apply_metric_power(z, s, -0.5);
    if (stats) {
        stats->iterations = st.iterations;
        stats->relative_residual = st.relative_residual;
        const double fs = sobolev_norm(f, s);
        stats->inverse_norm_ratio = (fs > 0) ? sobolev_norm(w, s) / fs : 0.0;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Branch tracing.

struct BranchPoint {
    double s = 0.0;
    RealField omega;
    double nu_used = 0.0;
    double fixed_point_residual = 0.0; // H^s norm of w + inv{Phi(0)+Q(w)}
    double omega_norm = 0.0;           // ||w||_s
    double alpha = 0.0;                // max{1-s, |nu_1 - nu_s|}
    double contraction_rate = 0.0;     // observed successive-difference ratio
    int iterations = 0;
    bool ball_ok = true;               // ||w||_s <= r0 * alpha
};

struct BranchOptions {
    double step_tol = 1e-11; // successive H^s difference
    int max_iterations = 200;
    double r0 = 10.0;        // ball radius multiplier
    double minres_tol = 1e-10;
};

class BranchDiverged : public std::runtime_error {
  public:
    BranchDiverged(const std::string& msg, double rate) : std::runtime_error(msg), rate(rate) {}
    double rate;
};

inline BranchPoint branch_step(const ContinuationContext& ctx, double s, double nu_s,
                               const RealField* omega_init = nullptr, const BranchOptions& opts = {}) {
    require_order(s);
    const GridSpec& g = ctx.grid();
    RealField omega = omega_init ? detail::radialize(*omega_init) : RealField(g);
    const RealField phi0 = phi_map(ctx, RealField(g), s, nu_s);

    double prev_diff = -1.0;
    double rate = 0.0;
    BranchPoint pt;
    pt.s = s;
    pt.nu_used = nu_s;

    int it = 0;
    int growth_streak = 0;
    for (; it < opts.max_iterations; ++it) {
        RealField q = q_remainder(ctx, omega, s, nu_s);
        RealField rhs(g);
        for (std::size_t i = 0; i < rhs.values.size(); ++i) rhs.values[i] = phi0.values[i] + q.values[i];
        RealField next = invert_linearized_at_anchor(ctx, rhs, s, nu_s, nullptr, opts.minres_tol);
        for (auto& v : next.values) v = -v;

        RealField diff_f = next - omega;
        const double diff = sobolev_norm(diff_f, s);
        if (prev_diff > 0.0 && diff > 1e-14) {
            rate = diff / prev_diff;
            if (rate >= 1.0) {
                if (++growth_streak >= 3)
                    throw BranchDiverged("fixed-point iteration diverged at s = " + std::to_string(s) +
                                             " (rate " + std::to_string(rate) + ")",
                                         rate);
            } else {
                growth_streak = 0;
            }
        }
        prev_diff = diff;
        omega = std::move(next);
        if (diff < opts.step_tol) {
            ++it;
            break;
        }
        if (sobolev_norm_sq(omega, s) > 1e8)
            throw BranchDiverged("fixed-point iterate blew up at s = " + std::to_string(s), rate);
    }

    // closing the loop once more gives the honest fixed-point residual
    {
        RealField q = q_remainder(ctx, omega, s, nu_s);
        RealField rhs(g);
        for (std::size_t i = 0; i < rhs.values.size(); ++i) rhs.values[i] = phi0.values[i] + q.values[i];
        RealField img = invert_linearized_at_anchor(ctx, rhs, s, nu_s, nullptr, opts.minres_tol);
        RealField res(g);
        for (std::size_t i = 0; i < res.values.size(); ++i) res.values[i] = omega.values[i] + img.values[i];
        pt.fixed_point_residual = sobolev_norm(res, s);
    }

    pt.omega = omega;
    pt.omega_norm = sobolev_norm(omega, s);
    pt.alpha = std::max(1.0 - s, std::abs(ctx.nu1() - nu_s));
    pt.contraction_rate = rate;
    pt.iterations = it;
    pt.ball_ok = (pt.alpha <= 0.0) ? (pt.omega_norm < 1e-8)
                                   : (pt.omega_norm <= opts.r0 * pt.alpha);
    return pt;
}

struct Branch {
    double nu1 = 0.0;
    std::vector<BranchPoint> points; // ordered by decreasing s
    double r0_estimate = 0.0;        // max omega_norm / alpha over points with alpha > 0
    double smallest_converged_s = 1.0;
    bool stopped_early = false;
    std::string stop_reason;
};

// nu_provider(s) supplies nu_s ("measured" from a sweep table or "direct"
// re-solves; only this scalar crosses from the ground-state pipeline).
inline Branch trace_branch(const ContinuationContext& ctx, const std::vector<double>& s_values,
                           const std::function<double(double)>& nu_provider,
                           const BranchOptions& opts = {}) {
    Branch br;
    br.nu1 = ctx.nu1();
    double prev = 2.0;
    for (double s : s_values) {
        if (!(s > 0.0) || s > 1.0) throw std::invalid_argument("branch s values must lie in (0,1]");
        if (s >= prev) throw std::invalid_argument("branch s values must decrease from 1");
        prev = s;
    }
    const RealField* warm = nullptr;
    for (double s : s_values) {
        try {
            const double nu_s = nu_provider(s);
            BranchPoint pt = branch_step(ctx, s, nu_s, warm, opts);
            br.points.push_back(std::move(pt));
            warm = &br.points.back().omega;
            br.smallest_converged_s = s;
            if (br.points.back().alpha > 0.0)
                br.r0_estimate = std::max(br.r0_estimate, br.points.back().omega_norm / br.points.back().alpha);
        } catch (const BranchDiverged& e) {
            br.stopped_early = true;
            br.stop_reason = e.what();
            break;
        } catch (const std::runtime_error& e) {
            br.stopped_early = true;
            br.stop_reason = e.what();
            break;
        }
    }
    return br;
}

// ---------------------------------------------------------------------------
// Uniqueness comparison: the branch point against an independently solved
// ground state at the same parameters, up to grid translations.

struct UniquenessReport {
    bool pass = false;
    double linf_gap = 0.0;
    double sobolev_gap = 0.0;
    double nu_gap = 0.0;
    double tol = 0.0;
};

inline UniquenessReport uniqueness_test(const ContinuationContext& ctx, const GroundState& direct,
                                        const BranchPoint& pt, double tol) {
    if (!(direct.problem.grid == ctx.grid())) throw std::invalid_argument("uniqueness_test: grid mismatch");
    if (direct.problem.s != pt.s) throw std::invalid_argument("uniqueness_test: s mismatch");
    if (direct.problem.p != ctx.p()) throw std::invalid_argument("uniqueness_test: p mismatch");

    RealField centered = recenter_to_origin(direct.u);
    RealField pseudo = ctx.anchor.u;
    for (std::size_t i = 0; i < pseudo.values.size(); ++i) pseudo.values[i] += pt.omega.values[i];

    UniquenessReport rep;
    rep.tol = tol;
    RealField diff = centered - pseudo;
    rep.linf_gap = linf_norm(diff);
    rep.sobolev_gap = sobolev_norm(diff, pt.s);
    rep.nu_gap = std::abs(direct.nu - pt.nu_used);
    rep.pass = rep.linf_gap < tol && rep.sobolev_gap < tol && rep.nu_gap < tol;
    return rep;
}

} // namespace fracgs
