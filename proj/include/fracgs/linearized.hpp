// Second variation at a ground state: the linearized operator
//     L phi = (-Dlt)^s phi + phi - p nu u^{p-1} phi,
// its quadratic form, sector-wise smallest eigenvalues, and the
// nondegeneracy verdict (kernel = the N translation modes).
//
// Eigenvalue conventions: L is self-adjoint in L2 and the spectra reported
// here are its L2 eigenvalues. The H^s-orthogonality constraint and the
// radial gap K_r concern the generalized problem with the metric
// B = 1 + (-Dlt)^s; it is handled through the symmetrized operator
// B^{-1/2} L B^{-1/2}, whose zero set coincides with L's.
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fracgs/ground_state.hpp"
#include "fracgs/krylov.hpp"

namespace fracgs {

inline RealField linearized_potential(const GroundState& gs) {
    RealField v(gs.problem.grid);
    const double p = gs.problem.p;
    for (std::size_t i = 0; i < v.values.size(); ++i)
        v.values[i] = p * gs.nu * std::pow(std::max(gs.u.values[i], 0.0), p - 1.0);
    return v;
}

// L phi, evaluated spectrally on the paired rows (Nyquist projected out,
// matching the multiplier convention used everywhere else).
inline RealField apply_linearized(const GroundState& gs, const RealField& phi) {
    const GridSpec& g = gs.problem.grid;
    if (!(g == phi.grid)) throw std::invalid_argument("grid mismatch");
    const double s = gs.problem.s;
    const RealField vphi = pointwise_mul(linearized_potential(gs), phi);
    SpectralField ph = to_spectral(phi);
    SpectralField vh = to_spectral(vphi);
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < ph.coeffs.size(); ++flat) {
        g.decode(flat, idx);
        bool nyq = false;
        double xi2 = 0.0;
        for (int d = 0; d < g.dims; ++d) {
            if (g.is_nyquist(idx[d])) nyq = true;
            const double xi = g.freq(idx[d]);
            xi2 += xi * xi;
        }
        if (nyq) {
            ph.coeffs[flat] = 0.0;
            continue;
        }
        const double metric = 1.0 + (xi2 == 0.0 ? 0.0 : std::pow(xi2, s));
        ph.coeffs[flat] = metric * ph.coeffs[flat] - vh.coeffs[flat];
    }
    return to_real(ph);
}

// J''(u, nu)[phi, psi] = <phi, psi>_s - p nu int u^{p-1} phi psi.
inline double quadratic_form(const GroundState& gs, const RealField& phi, const RealField& psi) {
    const double metric_part = sobolev_inner(phi, psi, gs.problem.s);
    const RealField vphi = pointwise_mul(linearized_potential(gs), phi);
    return metric_part - l2_inner(vphi, psi);
}

// ---------------------------------------------------------------------------
// Sector spectra.

namespace detail {

inline ApplyFn wrap_field_op(const GridSpec& g, std::function<RealField(const RealField&)> op) {
    return [g, op = std::move(op)](const Vec& in, Vec& out) {
        RealField phi(g);
        phi.values = in;
        RealField r = op(phi);
        out = std::move(r.values);
    };
}

// Orthogonal projector onto the lattice realization of one angular sector,
// with the unpaired Nyquist rows removed (they sit outside the operator's
// range and would otherwise masquerade as spurious null modes).
inline ApplyFn sector_projector(const GridSpec& g, const SectorSpec& sector) {
    return [g, sector](const Vec& in, Vec& out) {
        RealField phi(g);
        phi.values = in;
        phi = apply_symbol(phi, [](double) { return 1.0; }); // drop Nyquist rows
        if (g.dims == 1) {
            phi = parity_part(phi, 0, sector.ell == 1);
        } else if (sector.ell == 1) {
            RealField acc(g);
            for (int axis = 0; axis < g.dims; ++axis) {
                RealField part = lattice_sector_project(phi, sector, axis);
                for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += part.values[i];
            }
            phi = std::move(acc);
        } else {
            phi = lattice_sector_project(phi, sector, 0);
        }
        out = std::move(phi.values);
    };
}

inline double potential_max(const GroundState& gs) {
    double m = 0.0;
    const double p = gs.problem.p;
    for (double v : gs.u.values) m = std::max(m, p * gs.nu * std::pow(std::max(v, 0.0), p - 1.0));
    return m;
}

inline double symbol_max(const GridSpec& g, double s) {
    const double ximax2 = g.dims * std::pow(0.5 * g.points * g.freq_step(), 2.0);
    return std::pow(ximax2, s);
}

} // namespace detail

struct SectorEigenOptions {
    std::uint64_t seed = 7;
    int max_outer = 72;
    double inner_rel_tol = 1e-11;
    std::vector<RealField> warm_starts;
};

// m smallest L2 eigenvalues of L restricted to the sector, by deflated
// shift-invert Lanczos with sector projection applied every step.
inline std::vector<EigenPair> sector_eigenpairs(const GroundState& gs, const SectorSpec& sector,
                                                int count, const SectorEigenOptions& opts = {}) {
    if (count < 1 || count > 10) throw std::invalid_argument("eigenvalue count must lie in [1,10]");
    if (gs.problem.grid.dims == 1 && sector.ell > 1)
        throw std::invalid_argument("N = 1 has only the two parity sectors");
    if (gs.problem.grid.dims >= 2) validate(sector, gs.problem.grid.dims);
    const GridSpec& g = gs.problem.grid;
    const double s = gs.problem.s;

    const RealField V = linearized_potential(gs);
    ApplyFn apply_L = detail::wrap_field_op(g, [g, s, V](const RealField& phi) {
        SpectralField ph = to_spectral(phi);
        SpectralField vh = to_spectral(pointwise_mul(V, phi));
        std::array<int, 3> idx{0, 0, 0};
        for (std::size_t flat = 0; flat < ph.coeffs.size(); ++flat) {
            g.decode(flat, idx);
            bool nyq = false;
            double xi2 = 0.0;
            for (int d = 0; d < g.dims; ++d) {
                if (g.is_nyquist(idx[d])) nyq = true;
                const double xi = g.freq(idx[d]);
                xi2 += xi * xi;
            }
            if (nyq) {
                ph.coeffs[flat] = 0.0;
                continue;
            }
            const double metric = 1.0 + (xi2 == 0.0 ? 0.0 : std::pow(xi2, s));
            ph.coeffs[flat] = metric * ph.coeffs[flat] - vh.coeffs[flat];
        }
        return to_real(ph);
    });
    ApplyFn project = detail::sector_projector(g, sector);

    LanczosOptions lopts;
    const double vmax = detail::potential_max(gs);
    lopts.sigma = 1.0 - vmax - 1.0; // certified lower bound minus margin
    lopts.seed = opts.seed;
    lopts.max_outer = opts.max_outer;
    lopts.inner_rel_tol = opts.inner_rel_tol;
    lopts.residual_tol = 1e-9 * (1.0 + detail::symbol_max(g, s) + vmax);
    const double sigma = lopts.sigma;
    lopts.precond = detail::wrap_field_op(g, [s, sigma](const RealField& r) {
        return apply_symbol(r, [s, sigma](double xi2) {
            return 1.0 / (1.0 + (xi2 == 0.0 ? 0.0 : std::pow(xi2, s)) - sigma);
        });
    });
    for (const auto& w : opts.warm_starts) lopts.warm_starts.push_back(w.values);

    return smallest_eigenpairs(apply_L, project, g.size(), count, lopts);
}

inline std::vector<double> sector_spectrum(const GroundState& gs, const SectorSpec& sector, int count,
                                           const SectorEigenOptions& opts = {}) {
    std::vector<double> vals;
    for (const auto& ep : sector_eigenpairs(gs, sector, count, opts)) vals.push_back(ep.value);
    return vals;
}

// Default warm starts per sector: the translation modes for ell = 1, the
// state itself for ell = 0, a quadrupole-weighted state for ell = 2.
inline SectorEigenOptions default_sector_options(const GroundState& gs, const SectorSpec& sector,
                                                 std::uint64_t seed = 7) {
    SectorEigenOptions opts;
    opts.seed = seed;
    const GridSpec& g = gs.problem.grid;
    if (sector.ell == 1) {
        for (int d = 0; d < g.dims; ++d) opts.warm_starts.push_back(spectral_derivative(gs.u, d));
    } else if (sector.ell == 0) {
        opts.warm_starts.push_back(gs.u);
    } else if (sector.ell == 2 && g.dims >= 2) {
        RealField q(g);
        std::array<int, 3> idx{0, 0, 0};
        for (std::size_t flat = 0; flat < q.values.size(); ++flat) {
            g.decode(flat, idx);
            const double x = g.coord(idx[0]), y = g.coord(idx[1]);
            q.values[flat] = (x * x - y * y) * gs.u.values[flat];
        }
        opts.warm_starts.push_back(q);
    }
    return opts;
}

// ---------------------------------------------------------------------------
// Radial spectral gap K_r: smallest value of J''[phi,phi]/||phi||_s^2 over
// radial phi with phi perp_s u. Realized as the smallest eigenvalue of
// B^{-1/2} L B^{-1/2} on the radial sector orthogonal to B^{1/2}u; the
// constraint does not commute with the operator, so the complement is pushed
// to a harmless level c by working with P A P + c (I - P).
inline double radial_spectral_gap(const GroundState& gs, std::uint64_t seed = 11,
                                  double* residual_out = nullptr) {
    const GridSpec& g = gs.problem.grid;
    const double s = gs.problem.s;
    const RealField V = linearized_potential(gs);
    const double vmax = detail::potential_max(gs);

    RealField z = apply_metric_power(gs.u, s, 0.5);
    {
        const double zn = l2_norm(z);
        z = (1.0 / zn) * z;
    }

    auto sym_apply = [g, s, V](const RealField& in) {
        RealField a = apply_metric_power(in, s, -0.5);
        a = pointwise_mul(V, a);
        a = apply_metric_power(a, s, -0.5);
        RealField out(g);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = in.values[i] - a.values[i];
        return out;
    };

    auto project_field = [g, z](RealField phi) {
        phi = apply_symbol(phi, [](double) { return 1.0; });
        if (g.dims == 1)
            phi = parity_part(phi, 0, false);
        else
            phi = lattice_sector_project(phi, SectorSpec{0}, 0);
        axpy(-l2_inner(z, phi) / l2_inner(z, z), z, phi);
        return phi;
    };

    const double c_far = 3.0 * (1.0 + vmax); // parks the constrained complement
    ApplyFn apply = detail::wrap_field_op(g, [=](const RealField& phi) {
        RealField pin = project_field(phi);
        RealField ap = sym_apply(pin);
        ap = project_field(ap);
        for (std::size_t i = 0; i < ap.values.size(); ++i)
            ap.values[i] += c_far * (phi.values[i] - pin.values[i]);
        return ap;
    });
    ApplyFn project = detail::wrap_field_op(g, [=](const RealField& phi) { return project_field(phi); });

    LanczosOptions lopts;
    lopts.sigma = std::min(1.0 - vmax, c_far) - 1.0;
    lopts.seed = seed;
    lopts.max_outer = 72;
    lopts.residual_tol = 1e-10 * (1.0 + vmax + c_far);
    const double sigma = lopts.sigma;
    lopts.precond = detail::wrap_field_op(g, [sigma](const RealField& r) {
        RealField out(r.grid);
        const double inv = 1.0 / (1.0 - sigma);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = inv * r.values[i];
        return out;
    });

    auto pairs = smallest_eigenpairs(apply, project, g.size(), 1, lopts);
    if (pairs.empty()) throw std::runtime_error("radial gap eigensolve returned nothing");
    if (residual_out) *residual_out = pairs.front().residual;
    return pairs.front().value;
}

// ---------------------------------------------------------------------------
// Nondegeneracy report.

struct SpectrumReport {
    int dims = 0;
    double s = 0.0, p = 0.0;
    std::map<int, std::vector<double>> sector_eigs;
    std::map<int, double> sector_residuals; // worst eigensolver residual per sector
    int kernel_dim = 0;
    double K_r = 0.0;
    double self_pairing = 0.0;
    double zero_tol = 0.0;
    bool degenerate = false;
    std::string note;
};

// zero_tol < 0 requests the default: 1e-5 in units of the ell = 0 gap.
inline SpectrumReport nondegeneracy_report(const GroundState& gs, double zero_tol = -1.0,
                                           std::uint64_t seed = 7) {
    const GridSpec& g = gs.problem.grid;
    SpectrumReport rep;
    rep.dims = g.dims;
    rep.s = gs.problem.s;
    rep.p = gs.problem.p;

    const int m1 = g.dims + 1;
    std::map<int, int> counts{{0, 2}, {1, m1}};
    if (g.dims >= 2) counts[2] = 1;

    std::map<int, std::vector<EigenPair>> pairs_by_sector;
    for (const auto& [ell, m] : counts) {
        SectorSpec sector{ell};
        auto opts = default_sector_options(gs, sector, seed + static_cast<std::uint64_t>(ell));
        auto pairs = sector_eigenpairs(gs, sector, m, opts);
        std::vector<double> vals;
        double worst = 0.0;
        for (const auto& ep : pairs) {
            vals.push_back(ep.value);
            worst = std::max(worst, ep.residual);
        }
        rep.sector_eigs[ell] = std::move(vals);
        rep.sector_residuals[ell] = worst;
        pairs_by_sector[ell] = std::move(pairs);
    }

    const auto& e0 = rep.sector_eigs[0];
    const double gap0 = (e0.size() >= 2) ? (e0[1] - e0[0]) : 1.0;
    rep.zero_tol = (zero_tol < 0.0) ? 1e-5 * gap0 : zero_tol;

    // A mode counts as null only when tightly converged inside the zero
    // window; anything that is neither a certified null mode nor certified
    // away from zero (|value| - residual >= zero_tol) flags the report.
    int kernel = 0;
    for (const auto& [ell, pairs] : pairs_by_sector) {
        int nulls = 0;
        for (const auto& ep : pairs) {
            const bool zero_like = std::abs(ep.value) < rep.zero_tol && ep.residual <= rep.zero_tol;
            const bool certified_nonzero = std::abs(ep.value) - ep.residual >= rep.zero_tol;
            if (zero_like) {
                kernel++;
                nulls++;
            } else if (!certified_nonzero) {
                rep.degenerate = true;
                rep.note = "DEGENERATE: unresolved near-zero mode in sector " + std::to_string(ell);
            }
        }
        if (ell == 1 && nulls != g.dims) {
            rep.degenerate = true;
            rep.note = "DEGENERATE: translation sector carries " + std::to_string(nulls) +
                       " null modes, expected " + std::to_string(g.dims);
        }
        if (ell != 1 && nulls > 0) {
            rep.degenerate = true;
            rep.note = "DEGENERATE: unexpected null mode in sector " + std::to_string(ell);
        }
    }
    rep.kernel_dim = kernel;

    rep.K_r = radial_spectral_gap(gs, seed + 17);
    rep.self_pairing = quadratic_form(gs, gs.u, gs.u);
    return rep;
}

} // namespace fracgs
