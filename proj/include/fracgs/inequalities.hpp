// Elementary multiplier-asymptotics inequalities: the gap bound
// ||xi|^{2s} - |xi|^{2sb}| <= 4 C_{sb,d} |sb - s| (1 + |xi|^{2(sb+d)}),
// C_{sb,d} = (2 sb e)^{-1} + (d e)^{-1}, valid under d > 2|sb - s|, together
// with the scalar inequalities it is assembled from. The suite sweeps
// randomized parameters plus the analytic extremal points.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "fracgs/field.hpp"

namespace fracgs {

struct MultiplierGapParams {
    double sigma_bar; // order of the reference multiplier, in (0,1]
    double s;         // perturbed order, in (0,1]
    double delta;     // spectral margin, > 2|sigma_bar - s|
};

inline void validate(const MultiplierGapParams& p) {
    if (!(p.sigma_bar > 0.0) || p.sigma_bar > 1.0) throw std::invalid_argument("sigma_bar must lie in (0,1]");
    if (!(p.s > 0.0) || p.s > 1.0) throw std::invalid_argument("s must lie in (0,1]");
    if (!(p.delta > 2.0 * std::abs(p.sigma_bar - p.s)))
        throw std::invalid_argument("delta must exceed 2|sigma_bar - s|");
}

inline double gap_constant(const MultiplierGapParams& p) {
    const double e = std::exp(1.0);
    return 1.0 / (2.0 * p.sigma_bar * e) + 1.0 / (p.delta * e);
}

struct InequalityCheck {
    double lhs;
    double rhs;
    bool holds;
};

// Floating-point guard: a genuine violation dwarfs this; equality cases may
// straddle by an ulp.
inline bool holds_with_guard(double lhs, double rhs) {
    return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}

inline InequalityCheck check_multiplier_inequality(double xi_abs, const MultiplierGapParams& p) {
    validate(p);
    if (!(xi_abs > 0.0)) throw std::invalid_argument("xi_abs must be positive");
    const double lhs = std::abs(std::pow(xi_abs, 2.0 * p.s) - std::pow(xi_abs, 2.0 * p.sigma_bar));
    const double rhs = 4.0 * gap_constant(p) * std::abs(p.sigma_bar - p.s) *
                       (1.0 + std::pow(xi_abs, 2.0 * (p.sigma_bar + p.delta)));
    return {lhs, rhs, holds_with_guard(lhs, rhs)};
}

struct InequalityTally {
    long checked = 0;
    long violations = 0;
    double min_margin = std::numeric_limits<double>::infinity(); // min of rhs - lhs
};

struct InequalityReport {
    long samples = 0;
    std::uint64_t seed = 0;
    std::map<std::string, InequalityTally> tallies;
    double extremal_equality_gap = 0.0; // |lhs - rhs| at tau = e^{-1/(2 sb)}

    bool zero_violations() const {
        for (const auto& [name, t] : tallies)
            if (t.violations > 0) return false;
        return true;
    }
};

namespace detail {

inline void tally(InequalityReport& rep, const std::string& name, double lhs, double rhs) {
    auto& t = rep.tallies[name];
    t.checked++;
    t.min_margin = std::min(t.min_margin, rhs - lhs);
    if (!holds_with_guard(lhs, rhs)) t.violations++;
}

inline void check_scalar_family(InequalityReport& rep, const MultiplierGapParams& p, double tau, double t) {
    const double C = gap_constant(p);
    const double gap2 = 2.0 * std::abs(p.sigma_bar - p.s);

    // (1 + tau^{2sb+d}) tau^{2|sb-s|} <= 2 (1 + tau^{2(sb+d)})
    {
        const double lhs = (1.0 + std::pow(tau, 2.0 * p.sigma_bar + p.delta)) * std::pow(tau, gap2);
        const double rhs = 2.0 * (1.0 + std::pow(tau, 2.0 * (p.sigma_bar + p.delta)));
        tally(rep, "product_split", lhs, rhs);
    }
    // |e^t - 1| <= |t| e^{|t|}
    {
        const double lhs = std::abs(std::expm1(t));
        const double rhs = std::abs(t) * std::exp(std::abs(t));
        tally(rep, "exp_bound", lhs, rhs);
    }
    // tau in (0,1): |tau^{2sb} log tau| <= (2 sb e)^{-1}
    if (tau > 0.0 && tau < 1.0) {
        const double lhs = std::abs(std::pow(tau, 2.0 * p.sigma_bar) * std::log(tau));
        const double rhs = 1.0 / (2.0 * p.sigma_bar * std::exp(1.0));
        tally(rep, "log_below_one", lhs, rhs);
    }
    // tau >= 1: |tau^{-d} log tau| <= (d e)^{-1}
    if (tau >= 1.0) {
        const double lhs = std::abs(std::pow(tau, -p.delta) * std::log(tau));
        const double rhs = 1.0 / (p.delta * std::exp(1.0));
        tally(rep, "log_above_one", lhs, rhs);
    }
    // tau > 0: |tau^{2sb} log tau| <= C (1 + tau^{2sb+d})
    if (tau > 0.0) {
        const double lhs = std::abs(std::pow(tau, 2.0 * p.sigma_bar) * std::log(tau));
        const double rhs = C * (1.0 + std::pow(tau, 2.0 * p.sigma_bar + p.delta));
        tally(rep, "log_combined", lhs, rhs);
    }
}

} // namespace detail

inline MultiplierGapParams random_gap_params(Rng& rng) {
    MultiplierGapParams p;
    p.sigma_bar = rng.uniform(0.05, 1.0);
    p.s = rng.uniform(0.05, 1.0);
    p.delta = 2.0 * std::abs(p.sigma_bar - p.s) + rng.uniform(1e-3, 3.0);
    return p;
}

inline InequalityReport elementary_inequality_suite(long samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    InequalityReport rep;
    rep.samples = samples;
    rep.seed = seed;
    Rng rng(seed);

    for (long i = 0; i < samples; ++i) {
        const MultiplierGapParams p = random_gap_params(rng);
        const double tau = std::pow(10.0, rng.uniform(-6.0, 6.0));
        const double t = rng.uniform(-20.0, 20.0);
        detail::check_scalar_family(rep, p, tau, t);
        const auto gap = check_multiplier_inequality(tau, p);
        detail::tally(rep, "multiplier_gap", gap.lhs, gap.rhs);
    }

    // Analytic extremal points: tau = e^{-1/(2 sb)} attains equality in the
    // (0,1) log bound; tau = e^{1/d} attains it in the [1,inf) bound.
    Rng rng2(seed ^ 0xabcdef12345678ULL);
    double worst_eq = 0.0;
    for (int i = 0; i < 64; ++i) {
        const MultiplierGapParams p = random_gap_params(rng2);
        const double tau_lo = std::exp(-1.0 / (2.0 * p.sigma_bar));
        const double tau_hi = std::exp(1.0 / p.delta);
        detail::check_scalar_family(rep, p, tau_lo, 0.0);
        detail::check_scalar_family(rep, p, tau_hi, 0.0);
        const double lhs = std::abs(std::pow(tau_lo, 2.0 * p.sigma_bar) * std::log(tau_lo));
        const double rhs = 1.0 / (2.0 * p.sigma_bar * std::exp(1.0));
        worst_eq = std::max(worst_eq, std::abs(lhs - rhs));
    }
    rep.extremal_equality_gap = worst_eq;
    return rep;
}

} // namespace fracgs
