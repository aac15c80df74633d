// Ground states of (-Delta)^s u + u = nu u^p: the constrained minimizer of
// the Rayleigh quotient ||u||_s^2 / ||u||_{L^{p+1}}^2, normalized to unit
// L^{p+1} norm so that nu = ||u||_s^2.
//
// Solver: Petviashvili fixed-point iteration
//     uhat <- S^gamma * (u^p)hat / (1 + |xi|^{2s}),   gamma = p/(p-1),
//     S    = <(1+|xi|^{2s}) uhat, uhat> / <(u^p)hat, uhat>,
// with lattice symmetrization and positivity clipping every sweep, followed
// by a single rescale to the unit-L^{p+1} normalization. A normalized
// preconditioned gradient flow serves as fallback when the fixed point
// stalls.
#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "fracgs/fractional.hpp"
#include "fracgs/symmetry.hpp"

namespace fracgs {

struct ProblemSpec {
    GridSpec grid;
    double s = 0.5;
    double p = 2.0;
};

// Subcriticality: p + 1 below the critical exponent 2N/(N-2s) whenever
// N > 2s; otherwise every p > 1 is admissible.
inline void validate(const ProblemSpec& prob) {
    require_order(prob.s);
    if (!(prob.p > 1.0)) throw std::invalid_argument("p must exceed 1");
    const double N = prob.grid.dims;
    if (N > 2.0 * prob.s) {
        const double critical = 2.0 * N / (N - 2.0 * prob.s);
        if (!(prob.p + 1.0 < critical))
            throw std::invalid_argument("supercritical exponent: p+1 must stay below 2N/(N-2s)");
    }
}

struct SolverOptions {
    int max_iterations = 5000;
    double residual_tol = 1e-9;   // L2 of the Euler-Lagrange residual
    double step_tol = 1e-10;      // successive-iterate Linf difference
    double init_width = 1.0;      // width of the default Gaussian seed
    bool enable_fallback = true;  // normalized gradient flow on stall
    double clip_warn_mass = 1e-8; // clipped-negative mass worth flagging
};

struct GroundState {
    ProblemSpec problem;
    RealField u;             // normalized profile, ||u||_{L^{p+1}} = 1
    double nu = 0.0;         // ||u||_s^2, the minimal Rayleigh value
    double residual = 0.0;   // || (-Dlt)^s u + u - nu u^p ||_{L2}
    int iterations = 0;
    double lp1_norm = 0.0;
    double clipped_mass = 0.0;    // total negative mass removed, flagged if large
    double symmetry_defect = 0.0; // max spread over equal-radius lattice orbits
    bool used_fallback = false;
};

class SolveFailure : public std::runtime_error {
  public:
    SolveFailure(const std::string& msg, double residual, int iterations)
        : std::runtime_error(msg), last_residual(residual), iterations(iterations) {}
    double last_residual;
    int iterations;
};

// ---------------------------------------------------------------------------

inline double rayleigh_quotient(const RealField& u, double s, double p) {
    require_order(s);
    const double den = integral_power(u, p + 1.0);
    if (!(den > 1e-280)) throw std::invalid_argument("Rayleigh quotient of the zero field");
    return sobolev_norm_sq(u, s) / std::pow(den, 2.0 / (p + 1.0));
}

// J_s(u, nu) = 1/2 ||u||_s^2 - nu/(p+1) int |u|^{p+1}
inline double functional_energy(const RealField& u, double nu, double s, double p) {
    return 0.5 * sobolev_norm_sq(u, s) - nu / (p + 1.0) * integral_power(u, p + 1.0);
}

// Pointwise residual field (-Dlt)^s u + u - nu u^p; this is the L2
// representative of the first variation (the H^s Riesz representative is the
// same field seen through the inverse metric (1+|xi|^{2s})^{-1}). The
// unpaired Nyquist row lies outside the discrete test space (the multiplier
// convention drops it), so the residual is evaluated in that Galerkin sense:
// all operators and the nonlinearity are combined spectrally on the paired
// rows only.
inline RealField euler_lagrange_residual(const RealField& u, double nu, double s, double p) {
    require_order(s);
    SpectralField uh = to_spectral(u);
    SpectralField wh = to_spectral(signed_power(u, p));
    const GridSpec& g = u.grid;
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < uh.coeffs.size(); ++flat) {
        g.decode(flat, idx);
        bool nyq = false;
        double xi2 = 0.0;
        for (int d = 0; d < g.dims; ++d) {
            if (g.is_nyquist(idx[d])) nyq = true;
            const double xi = g.freq(idx[d]);
            xi2 += xi * xi;
        }
        if (nyq) {
            uh.coeffs[flat] = 0.0;
            continue;
        }
        const double metric = 1.0 + (xi2 == 0.0 ? 0.0 : std::pow(xi2, s));
        uh.coeffs[flat] = metric * uh.coeffs[flat] - nu * wh.coeffs[flat];
    }
    return to_real(uh);
}

// Max value spread over groups of lattice points sharing the exact same
// radius (pythagorean orbits beyond the symmetrized ones); an
// interpolation-free measure of radial symmetry.
inline double radial_symmetry_defect(const RealField& u) {
    const GridSpec& g = u.grid;
    if (g.dims == 1) {
        double worst = 0.0;
        for (int j = 1; j < g.points / 2; ++j) {
            std::array<int, 3> a{g.origin_index() + j, 0, 0}, b{g.origin_index() - j, 0, 0};
            worst = std::max(worst, std::abs(u.values[g.encode(a)] - u.values[g.encode(b)]));
        }
        return worst;
    }
    std::map<long long, std::pair<double, double>> orbits; // r^2 (lattice) -> min,max
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < u.values.size(); ++flat) {
        g.decode(flat, idx);
        long long r2 = 0;
        bool interior = true;
        for (int d = 0; d < g.dims; ++d) {
            const long long k = idx[d] - g.origin_index();
            r2 += k * k;
            if (std::abs(g.coord(idx[d])) > 0.5 * g.half_width) interior = false;
        }
        if (!interior) continue;
        auto it = orbits.find(r2);
        if (it == orbits.end())
            orbits.emplace(r2, std::make_pair(u.values[flat], u.values[flat]));
        else {
            it->second.first = std::min(it->second.first, u.values[flat]);
            it->second.second = std::max(it->second.second, u.values[flat]);
        }
    }
    double worst = 0.0;
    for (const auto& [r2, mm] : orbits) worst = std::max(worst, mm.second - mm.first);
    return worst;
}

namespace detail {

struct SweepState {
    double clipped_mass = 0.0;
};

inline void symmetrize_and_clip(RealField& u, SweepState& st) {
    u = symmetrize_lattice(u);
    double clipped = 0.0;
    for (auto& v : u.values) {
        if (v < 0.0) {
            clipped -= v;
            v = 0.0;
        }
    }
    st.clipped_mass += clipped * u.grid.cell_volume();
}

} // namespace detail

inline GroundState solve_ground_state(const ProblemSpec& prob, const RealField* init = nullptr,
                                      const SolverOptions& opts = {}) {
    validate(prob);
    const GridSpec& g = prob.grid;
    const double s = prob.s, p = prob.p;
    const double gamma = p / (p - 1.0);

    RealField u = init ? *init : gaussian_field(g, opts.init_width);
    if (init && !(linf_norm(u) > 0.0 && *std::max_element(u.values.begin(), u.values.end()) > 0.0))
        throw std::invalid_argument("initial field must be positive somewhere");
    detail::SweepState sweep;
    detail::symmetrize_and_clip(u, sweep);
    {
        const double n0 = lp_norm(u, p + 1.0);
        if (!(n0 > 0)) throw std::invalid_argument("initial field vanishes after clipping");
        u = (1.0 / n0) * u;
    }

    auto el_residual_unit_norm = [&](const RealField& v) {
        // residual of the rescaled field (unit L^{p+1}, nu = ||.||_s^2)
        const double c = 1.0 / lp_norm(v, p + 1.0);
        RealField w = c * v;
        const double nu = sobolev_norm_sq(w, s);
        return l2_norm(euler_lagrange_residual(w, nu, s, p));
    };

    double best_resid = std::numeric_limits<double>::infinity();
    int stall_counter = 0;
    int step_floor_counter = 0;
    bool fallback = false;
    int it = 0;
    double resid = std::numeric_limits<double>::infinity();

    for (; it < opts.max_iterations; ++it) {
        RealField u_next(g);
        if (!fallback) {
            // Petviashvili sweep
            SpectralField uh = to_spectral(u);
            SpectralField wh = to_spectral(signed_power(u, p));
            double num = 0.0, den = 0.0;
            std::array<int, 3> idx{0, 0, 0};
            for (std::size_t flat = 0; flat < uh.coeffs.size(); ++flat) {
                g.decode(flat, idx);
                bool nyq = false;
                double xi2 = 0.0;
                for (int d = 0; d < g.dims; ++d) {
                    if (g.is_nyquist(idx[d])) nyq = true;
                    const double xi = g.freq(idx[d]);
                    xi2 += xi * xi;
                }
                if (nyq) {
                    uh.coeffs[flat] = 0.0;
                    continue;
                }
                const double metric = 1.0 + (xi2 == 0.0 ? 0.0 : std::pow(xi2, s));
                num += metric * std::norm(uh.coeffs[flat]);
                den += (wh.coeffs[flat] * std::conj(uh.coeffs[flat])).real();
                uh.coeffs[flat] = wh.coeffs[flat] / metric;
            }
            if (!(den > 0.0)) throw SolveFailure("Petviashvili quotient lost positivity", resid, it);
            const double S = num / den;
            u_next = to_real(uh);
            for (auto& v : u_next.values) v *= std::pow(S, gamma);
        } else {
            // normalized preconditioned gradient flow
            const double tau = 0.9;
            const double nu = sobolev_norm_sq(u, s);
            RealField flow = apply_metric_power(signed_power(u, p), s, -1.0);
            u_next = RealField(g);
            for (std::size_t i = 0; i < u.values.size(); ++i)
                u_next.values[i] = (1.0 - tau) * u.values[i] + tau * nu * flow.values[i];
        }
        detail::symmetrize_and_clip(u_next, sweep);
        const double nrm = lp_norm(u_next, p + 1.0);
        if (!(nrm > 0)) throw SolveFailure("iterate collapsed to zero", resid, it);
        u_next = (1.0 / nrm) * u_next;

        double step = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i)
            step = std::max(step, std::abs(u_next.values[i] - u.values[i]));
        u = u_next;

        const bool check_now = (it % 10 == 9) || step < opts.step_tol;
        if (check_now) {
            resid = el_residual_unit_norm(u);
#ifdef FRACGS_TRACE
            std::fprintf(stderr, "[trace] it=%d step=%.3e resid=%.3e stall=%d fallback=%d\n", it, step,
                         resid, stall_counter, fallback ? 1 : 0);
#endif
            if (resid < opts.residual_tol && step < opts.step_tol) {
                ++it;
                break;
            }
            // discrete fixed point reached; further sweeps cannot move it
            if (step < 1e-3 * opts.step_tol) {
                if (++step_floor_counter >= 3) {
                    ++it;
                    break;
                }
            } else {
                step_floor_counter = 0;
            }
            if (resid < best_resid * 0.99) {
                best_resid = resid;
                stall_counter = 0;
            } else if (++stall_counter >= 8 && opts.enable_fallback && !fallback) {
                fallback = true; // fixed point stalled; switch strategies
                stall_counter = 0;
            }
        }
    }

    GroundState gs;
    gs.problem = prob;
    gs.u = recenter_to_origin(u);
    const double c = 1.0 / lp_norm(gs.u, p + 1.0);
    gs.u = c * gs.u;
    gs.nu = sobolev_norm_sq(gs.u, s);
    gs.lp1_norm = lp_norm(gs.u, p + 1.0);
    gs.residual = l2_norm(euler_lagrange_residual(gs.u, gs.nu, s, p));
    gs.iterations = it;
    gs.clipped_mass = sweep.clipped_mass;
    gs.symmetry_defect = radial_symmetry_defect(gs.u);
    gs.used_fallback = fallback;
    if (gs.residual > opts.residual_tol) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "ground-state iteration did not converge (residual %.3e after %d iterations)",
                      gs.residual, it);
        throw SolveFailure(msg, gs.residual, it);
    }
    return gs;
}

// s = 1 anchor solve (classical multiplier |xi|^2), same contract.
inline GroundState solve_local(const ProblemSpec& prob, const RealField* init = nullptr,
                               const SolverOptions& opts = {}) {
    if (prob.s != 1.0) throw std::invalid_argument("solve_local requires s = 1");
    return solve_ground_state(prob, init, opts);
}

// Continuum estimate of nu: the stored value plus the kink correction of the
// lattice Sobolev sum (see fractional.hpp). A measurement convention for
// continuum comparisons only; every operator identity uses the raw value.
inline double continuum_nu_estimate(const GroundState& gs) {
    if (gs.problem.grid.dims != 1 || gs.problem.s >= 1.0) return gs.nu;
    return gs.nu + sobolev_kink_correction(gs.u, gs.problem.s);
}

// ---------------------------------------------------------------------------
// Polynomial-decay diagnostic: r -> u(r) r^{N+2s} along the radial ray.

struct DecayReport {
    std::vector<double> radii;
    std::vector<double> ratio;
    double max_ratio = 0.0;
    bool tail_flat = false;
    bool super_polynomial = false; // exponential-class decay beats the power law
    double window_lo = 0.0, window_hi = 0.0;
};

inline DecayReport decay_check(const GroundState& gs, const std::vector<double>& radii) {
    const GridSpec& g = gs.problem.grid;
    const double L = g.half_width;
    DecayReport rep;
    rep.window_lo = L / 8.0;
    rep.window_hi = L / 4.0;
    double prev = -1.0;
    for (double r : radii) {
        if (!(r > 0.0) || !(r < 0.5 * L)) throw std::invalid_argument("decay radii must lie in (0, L/2)");
        if (r <= prev) throw std::invalid_argument("decay radii must be strictly increasing");
        prev = r;
    }
    const RadialProfile prof = radial_ray(gs.u);
    const double expo = g.dims + 2.0 * gs.problem.s;
    double win_min = std::numeric_limits<double>::infinity(), win_max = 0.0;
    double win_first = 0.0, win_last = 0.0;
    bool any_window = false;
    for (double r : radii) {
        const double ratio = interp_profile(prof, r) * std::pow(r, expo);
        rep.radii.push_back(r);
        rep.ratio.push_back(ratio);
        rep.max_ratio = std::max(rep.max_ratio, std::abs(ratio));
        if (r >= rep.window_lo && r <= rep.window_hi) {
            if (!any_window) win_first = ratio;
            win_last = ratio;
            any_window = true;
            win_min = std::min(win_min, ratio);
            win_max = std::max(win_max, ratio);
        }
    }
    if (any_window && win_max > 0.0) {
        rep.tail_flat = (win_max - win_min) < 0.25 * win_max;
        rep.super_polynomial = (win_last < 0.3 * win_first);
        if (rep.super_polynomial) rep.tail_flat = false;
    }
    return rep;
}

inline std::vector<double> default_decay_radii(const GridSpec& g, int count = 24) {
    std::vector<double> r;
    const double lo = g.spacing() * 2.0, hi = 0.49 * g.half_width;
    for (int i = 0; i < count; ++i)
        r.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return r;
}

} // namespace fracgs
