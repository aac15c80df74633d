// Lattice symmetry operations: hyperoctahedral averaging, recentering,
// radial profiles, and the angular-sector machinery.
//
// Two kinds of sector projector live here.
//  * Lattice projectors: signed averages over grid symmetries (coordinate
//    flips, swaps). They are exact permutations of grid values, commute with
//    every Fourier-multiplier operator and with multiplication by a
//    symmetrized potential to machine precision, and are what the spectral
//    iterations use. Each isolates the angular harmonics of one symmetry
//    class (ell = 0: fully symmetric; ell = 1: odd in one coordinate, even in
//    the rest; ell = 2: flip-even, swap-antisymmetric).
//  * Moment projectors: polar resampling of a Fourier-upsampled field against
//    zonal harmonics. These implement the textbook angular mean / first
//    moment / second harmonic projections; they carry interpolation error and
//    are used for classification and API-level projection, not inside
//    eigensolver loops.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "fracgs/field.hpp"

namespace fracgs {

struct SectorSpec {
    int ell = 0; // 0 radial, 1 translational, 2 first strictly positive sector
};

inline void validate(const SectorSpec& sector, int dims) {
    if (sector.ell < 0 || sector.ell > 2) throw std::invalid_argument("sector ell must be 0, 1 or 2");
    if (sector.ell >= 1 && dims == 1) throw std::invalid_argument("angular sectors require N >= 2");
}

// ---------------------------------------------------------------------------
// Group elements: coordinate permutation followed by per-coordinate flips.

namespace detail {

struct GroupTerm {
    std::array<int, 3> perm{0, 1, 2};
    unsigned flip_mask = 0;
    double coeff = 1.0;
};

inline void apply_terms(const RealField& u, const std::vector<GroupTerm>& terms, RealField& out) {
    const GridSpec& g = u.grid;
    const int M = g.points;
    std::fill(out.values.begin(), out.values.end(), 0.0);
    std::array<int, 3> idx{0, 0, 0}, src{0, 0, 0};
    const std::size_t n = g.size();
    for (const auto& term : terms) {
        for (std::size_t flat = 0; flat < n; ++flat) {
            g.decode(flat, idx);
            for (int d = 0; d < g.dims; ++d) {
                int v = idx[term.perm[d]];
                if (term.flip_mask & (1u << d)) v = (M - v) % M;
                src[d] = v;
            }
            out.values[flat] += term.coeff * u.values[g.encode(src)];
        }
    }
}

inline std::vector<std::array<int, 3>> permutations(int dims) {
    if (dims == 1) return {{0, 1, 2}};
    if (dims == 2) return {{0, 1, 2}, {1, 0, 2}};
    return {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
}

// Projector terms for the lattice sector classes described above.
inline std::vector<GroupTerm> sector_terms(int dims, int ell, int axis) {
    std::vector<GroupTerm> terms;
    const unsigned nflips = 1u << dims;
    if (ell == 0) { // average over the full hyperoctahedral group
        auto perms = permutations(dims);
        const double c = 1.0 / (perms.size() * nflips);
        for (const auto& p : perms)
            for (unsigned f = 0; f < nflips; ++f) terms.push_back({p, f, c});
        return terms;
    }
    if (ell == 1) {
        // odd in `axis`, even in the others, symmetrized over the rest
        std::vector<std::array<int, 3>> perms;
        for (const auto& p : permutations(dims))
            if (p[axis] == axis) perms.push_back(p);
        const double c = 1.0 / (perms.size() * nflips);
        for (const auto& p : perms)
            for (unsigned f = 0; f < nflips; ++f) {
                const double sign = (f & (1u << axis)) ? -1.0 : 1.0;
                terms.push_back({p, f, sign * c});
            }
        return terms;
    }
    // ell == 2: flip-even, antisymmetric under the (axis, axis+1) swap.
    const int a = axis, b = (axis + 1) % dims;
    std::array<int, 3> swap{0, 1, 2};
    std::swap(swap[a], swap[b]);
    const double c = 1.0 / (2.0 * nflips);
    for (unsigned f = 0; f < nflips; ++f) {
        terms.push_back({{0, 1, 2}, f, c});
        terms.push_back({swap, f, -c});
    }
    return terms;
}

} // namespace detail

// Full hyperoctahedral average (exact, idempotent).
inline RealField symmetrize_lattice(const RealField& u) {
    RealField out(u.grid);
    detail::apply_terms(u, detail::sector_terms(u.grid.dims, 0, 0), out);
    return out;
}

// Even/odd part along one coordinate (exact); the 1D parity sectors.
inline RealField parity_part(const RealField& u, int axis, bool odd) {
    RealField out(u.grid);
    std::vector<detail::GroupTerm> terms = {
        {{0, 1, 2}, 0u, 0.5},
        {{0, 1, 2}, 1u << axis, odd ? -0.5 : 0.5},
    };
    detail::apply_terms(u, terms, out);
    return out;
}

// Signed lattice-sector average; `axis` selects the representative copy for
// ell = 1 (one of N) and the coordinate pair for ell = 2.
inline RealField lattice_sector_project(const RealField& u, const SectorSpec& sector, int axis = 0) {
    validate(sector, u.grid.dims);
    if (axis < 0 || axis >= u.grid.dims) throw std::invalid_argument("axis out of range");
    RealField out(u.grid);
    detail::apply_terms(u, detail::sector_terms(u.grid.dims, sector.ell, axis), out);
    return out;
}

// ---------------------------------------------------------------------------
// Recentering and radial data.

inline std::size_t argmax_index(const RealField& u) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < u.values.size(); ++i)
        if (u.values[i] > u.values[best]) best = i;
    return best;
}

// Circularly shift so the maximum sits at the origin index (exact on the torus).
inline RealField recenter_to_origin(const RealField& u) {
    const GridSpec& g = u.grid;
    std::array<int, 3> peak{0, 0, 0};
    g.decode(argmax_index(u), peak);
    std::array<int, 3> shift{0, 0, 0};
    for (int d = 0; d < g.dims; ++d) shift[d] = peak[d] - g.origin_index();
    RealField out(g);
    std::array<int, 3> idx{0, 0, 0}, src{0, 0, 0};
    for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
        g.decode(flat, idx);
        for (int d = 0; d < g.dims; ++d) src[d] = (idx[d] + shift[d] + g.points) % g.points;
        out.values[flat] = u.values[g.encode(src)];
    }
    return out;
}

// Values along the positive x1 ray from the origin: r_j = j h.
struct RadialProfile {
    std::vector<double> r;
    std::vector<double> value;
};

inline RadialProfile radial_ray(const RealField& u) {
    const GridSpec& g = u.grid;
    RadialProfile prof;
    std::array<int, 3> idx{0, 0, 2};
    for (int d = 0; d < 3; ++d) idx[d] = (d < g.dims) ? g.origin_index() : 0;
    for (int j = 0; j + g.origin_index() < g.points; ++j) {
        std::array<int, 3> p = idx;
        p[0] = g.origin_index() + j;
        prof.r.push_back(j * g.spacing());
        prof.value.push_back(u.values[g.encode(p)]);
    }
    return prof;
}

// Natural cubic-free interpolation (Catmull-Rom) of a profile sampled on an
// increasing abscissa; clamps to zero beyond the last sample.
inline double interp_profile(const RadialProfile& prof, double r) {
    const auto& xs = prof.r;
    const auto& ys = prof.value;
    if (xs.size() < 2 || r > xs.back()) return 0.0;
    if (r <= xs.front()) return ys.front();
    const auto it = std::upper_bound(xs.begin(), xs.end(), r);
    std::size_t i1 = static_cast<std::size_t>(it - xs.begin()) - 1;
    const std::size_t nmax = xs.size() - 1;
    const std::size_t i0 = (i1 == 0) ? 0 : i1 - 1;
    const std::size_t i2 = std::min(i1 + 1, nmax);
    const std::size_t i3 = std::min(i1 + 2, nmax);
    const double t = (r - xs[i1]) / (xs[i2] - xs[i1] + 1e-300);
    const double m1 = (i1 == i0) ? (ys[i2] - ys[i1]) : 0.5 * (ys[i2] - ys[i0]);
    const double m2 = (i3 == i2) ? (ys[i2] - ys[i1]) : 0.5 * (ys[i3] - ys[i1]);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * ys[i1] + (t3 - 2 * t2 + t) * m1 +
           (-2 * t3 + 3 * t2) * ys[i2] + (t3 - t2) * m2;
}

// Radial field built by evaluating a profile at |x| for every grid point.
inline RealField field_from_radial_profile(const GridSpec& g, const RadialProfile& prof) {
    RealField u(g);
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < u.values.size(); ++flat) {
        g.decode(flat, idx);
        double r2 = 0.0;
        for (int d = 0; d < g.dims; ++d) {
            const double x = g.coord(idx[d]);
            r2 += x * x;
        }
        u.values[flat] = interp_profile(prof, std::sqrt(r2));
    }
    return u;
}

// Bin-averaged radial profile (diagnostic; bins of width h/2).
inline RadialProfile binned_radial_mean(const RealField& u) {
    const GridSpec& g = u.grid;
    const double bin = 0.5 * g.spacing();
    std::map<long, std::pair<double, long>> bins;
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < u.values.size(); ++flat) {
        g.decode(flat, idx);
        double r2 = 0.0;
        for (int d = 0; d < g.dims; ++d) {
            const double x = g.coord(idx[d]);
            r2 += x * x;
        }
        const long b = static_cast<long>(std::floor(std::sqrt(r2) / bin + 0.5));
        auto& acc = bins[b];
        acc.first += u.values[flat];
        acc.second += 1;
    }
    RadialProfile prof;
    for (const auto& [b, acc] : bins) {
        prof.r.push_back(b * bin);
        prof.value.push_back(acc.first / acc.second);
    }
    return prof;
}

// ---------------------------------------------------------------------------
// Fourier upsampling (zero padding) onto a finer grid with the same box.

inline RealField fourier_upsample(const RealField& u, int factor) {
    if (factor <= 1) return u;
    const GridSpec& g = u.grid;
    GridSpec fine = make_grid(g.dims, g.points * factor, g.half_width);
    SpectralField uh = to_spectral(u);
    SpectralField fh(fine);
    std::array<int, 3> idx{0, 0, 0}, fidx{0, 0, 0};
    for (std::size_t flat = 0; flat < uh.coeffs.size(); ++flat) {
        g.decode(flat, idx);
        bool nyq = false;
        for (int d = 0; d < g.dims; ++d) {
            if (g.is_nyquist(idx[d])) nyq = true;
            const int k = g.freq_index(idx[d]);
            fidx[d] = (k >= 0) ? k : k + fine.points;
        }
        if (!nyq) fh.coeffs[fine.encode(fidx)] = uh.coeffs[flat];
    }
    return to_real(fh);
}

namespace detail {

inline double catmull_rom(double ym1, double y0, double y1, double y2, double t) {
    return y0 + 0.5 * t * (y1 - ym1 + t * (2 * ym1 - 5 * y0 + 4 * y1 - y2 + t * (3 * (y0 - y1) + y2 - ym1)));
}

// Periodic bicubic interpolation at physical coordinates.
inline double interp_point(const RealField& u, const std::array<double, 3>& x) {
    const GridSpec& g = u.grid;
    const double h = g.spacing();
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0, 0, 0};
    for (int d = 0; d < g.dims; ++d) {
        const double pos = (x[d] + g.half_width) / h;
        double fl = std::floor(pos);
        base[d] = static_cast<int>(fl);
        frac[d] = pos - fl;
    }
    auto wrap = [&](int i) { return ((i % g.points) + g.points) % g.points; };
    if (g.dims == 1) {
        double y[4];
        for (int a = 0; a < 4; ++a) y[a] = u.values[static_cast<std::size_t>(wrap(base[0] + a - 1))];
        return catmull_rom(y[0], y[1], y[2], y[3], frac[0]);
    }
    if (g.dims == 2) {
        double rows[4];
        for (int a = 0; a < 4; ++a) {
            const int i = wrap(base[0] + a - 1);
            double y[4];
            for (int b = 0; b < 4; ++b) {
                std::array<int, 3> p{i, wrap(base[1] + b - 1), 0};
                y[b] = u.values[g.encode(p)];
            }
            rows[a] = catmull_rom(y[0], y[1], y[2], y[3], frac[1]);
        }
        return catmull_rom(rows[0], rows[1], rows[2], rows[3], frac[0]);
    }
    double planes[4];
    for (int a = 0; a < 4; ++a) {
        const int i = wrap(base[0] + a - 1);
        double rows[4];
        for (int b = 0; b < 4; ++b) {
            const int j = wrap(base[1] + b - 1);
            double y[4];
            for (int c = 0; c < 4; ++c) {
                std::array<int, 3> p{i, j, wrap(base[2] + c - 1)};
                y[c] = u.values[g.encode(p)];
            }
            rows[b] = catmull_rom(y[0], y[1], y[2], y[3], frac[2]);
        }
        planes[a] = catmull_rom(rows[0], rows[1], rows[2], rows[3], frac[1]);
    }
    return catmull_rom(planes[0], planes[1], planes[2], planes[3], frac[0]);
}

inline double legendre_poly(int ell, double x) {
    if (ell == 0) return 1.0;
    if (ell == 1) return x;
    double pm1 = 1.0, p = x;
    for (int k = 2; k <= ell; ++k) {
        const double pn = ((2 * k - 1) * x * p - (k - 1) * pm1) / k;
        pm1 = p;
        p = pn;
    }
    return p;
}

} // namespace detail

// Spherical-harmonic sector projection by angular moments: the ell = 0 part
// is the angular mean at each radius, ell = 1 the first angular moments, and
// ell = 2 the second harmonics. Resamples a 2x Fourier-upsampled field on
// circles (N = 2, trapezoid in the angle, spectrally accurate) or on a
// Fibonacci sphere (N = 3, quadrature error documented as ~1e-3 relative).
inline RealField sector_project(const RealField& phi, const SectorSpec& sector) {
    validate(sector, phi.grid.dims);
    const GridSpec& g = phi.grid;
    const RealField fine = fourier_upsample(phi, 2);

    // angular nodes
    std::vector<std::array<double, 3>> nodes;
    if (g.dims == 2) {
        const int K = 64;
        for (int a = 0; a < K; ++a) {
            const double t = 2.0 * kPi * a / K;
            nodes.push_back({std::cos(t), std::sin(t), 0.0});
        }
    } else {
        const int K = 256;
        const double golden = kPi * (3.0 - std::sqrt(5.0));
        for (int a = 0; a < K; ++a) {
            const double z = 1.0 - 2.0 * (a + 0.5) / K;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double t = golden * a;
            nodes.push_back({rho * std::cos(t), rho * std::sin(t), z});
        }
    }

    // zonal kernel weight: N=2 -> n_l cos(l acos(c)); N=3 -> (2l+1) P_l(c)
    auto kernel = [&](double c) {
        c = std::clamp(c, -1.0, 1.0);
        if (g.dims == 2) {
            if (sector.ell == 0) return 1.0;
            return 2.0 * std::cos(sector.ell * std::acos(c));
        }
        return (2.0 * sector.ell + 1.0) * detail::legendre_poly(sector.ell, c);
    };

    // circle samples cached per distinct radius
    std::map<long long, std::vector<double>> samples;
    auto circle_values = [&](double r) -> const std::vector<double>& {
        const long long key = static_cast<long long>(std::llround(r * 1e9));
        auto it = samples.find(key);
        if (it != samples.end()) return it->second;
        std::vector<double> vals(nodes.size());
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            std::array<double, 3> x{r * nodes[a][0], r * nodes[a][1], r * nodes[a][2]};
            vals[a] = detail::interp_point(fine, x);
        }
        return samples.emplace(key, std::move(vals)).first->second;
    };

    RealField out(g);
    std::array<int, 3> idx{0, 0, 0};
    const double eps = 1e-12;
    for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
        g.decode(flat, idx);
        std::array<double, 3> x{0, 0, 0};
        double r2 = 0.0;
        for (int d = 0; d < g.dims; ++d) {
            x[d] = g.coord(idx[d]);
            r2 += x[d] * x[d];
        }
        const double r = std::sqrt(r2);
        if (r > 0.98 * g.half_width) {
            // outer frame: circles of this radius leave the box; fields of
            // interest have decayed here, pass through / zero by sector
            out.values[flat] = (sector.ell == 0) ? phi.values[flat] : 0.0;
            continue;
        }
        if (r < eps) {
            out.values[flat] = (sector.ell == 0) ? phi.values[flat] : 0.0;
            continue;
        }
        const auto& vals = circle_values(r);
        double acc = 0.0;
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            double c = 0.0;
            for (int d = 0; d < g.dims; ++d) c += (x[d] / r) * nodes[a][d];
            acc += kernel(c) * vals[a];
        }
        out.values[flat] = acc / nodes.size();
    }
    return out;
}

} // namespace fracgs
