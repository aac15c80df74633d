// Matrix-free symmetric Krylov kit: CG, MINRES, a tridiagonal QL
// eigensolver, and a deflated shift-invert Lanczos driver for the smallest
// eigenvalues of self-adjoint grid operators.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracgs/field.hpp"

namespace fracgs {

using Vec = std::vector<double>;
using ApplyFn = std::function<void(const Vec&, Vec&)>;

namespace detail {

inline double vdot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
inline double vnorm(const Vec& a) { return std::sqrt(vdot(a, a)); }
inline void vaxpy(double c, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}
inline void vscale(Vec& x, double c) {
    for (auto& v : x) v *= c;
}

} // namespace detail

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

// Preconditioned conjugate gradients for SPD operators. `patience` bounds
// the number of consecutive iterations without a factor-2 residual drop
// before the run is declared floored (rounding-limited).
inline SolveStats conjugate_gradient(const ApplyFn& A, const Vec& b, Vec& x,
                                     double rel_tol, int max_iter,
                                     const ApplyFn& precond = nullptr, int patience = 1000) {
    const std::size_t n = b.size();
    x.assign(n, 0.0);
    Vec r = b, z(n), p(n), Ap(n);
    const double bnorm = detail::vnorm(b);
    SolveStats stats;
    if (bnorm == 0.0) {
        stats.converged = true;
        return stats;
    }
    if (precond)
        precond(r, z);
    else
        z = r;
    p = z;
    double rz = detail::vdot(r, z);
    double best = std::numeric_limits<double>::infinity();
    int since_improved = 0;
    for (int k = 0; k < max_iter; ++k) {
        A(p, Ap);
        const double alpha = rz / detail::vdot(p, Ap);
        detail::vaxpy(alpha, p, x);
        detail::vaxpy(-alpha, Ap, r);
        const double rn = detail::vnorm(r);
        stats.iterations = k + 1;
        stats.relative_residual = rn / bnorm;
        if (stats.relative_residual < rel_tol) {
            stats.converged = true;
            return stats;
        }
        // rounding floor: no factor-2 progress for a long stretch
        if (stats.relative_residual < 0.5 * best) {
            best = stats.relative_residual;
            since_improved = 0;
        } else if (++since_improved > patience) {
            return stats;
        }
        if (precond)
            precond(r, z);
        else
            z = r;
        const double rz_new = detail::vdot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return stats;
}

// MINRES for symmetric (possibly indefinite) operators.
inline SolveStats minres(const ApplyFn& A, const Vec& b, Vec& x, double rel_tol, int max_iter) {
    const std::size_t n = b.size();
    x.assign(n, 0.0);
    SolveStats stats;
    const double beta1 = detail::vnorm(b);
    if (beta1 == 0.0) {
        stats.converged = true;
        return stats;
    }
    Vec v(n), v_old(n, 0.0), w(n, 0.0), w_old(n, 0.0), p(n);
    v = b;
    detail::vscale(v, 1.0 / beta1);
    double beta = beta1, eta = beta1;
    double gamma = 1.0, gamma_old = 1.0, sigma = 0.0, sigma_old = 0.0;

    for (int k = 0; k < max_iter; ++k) {
        A(v, p);
        const double alpha = detail::vdot(v, p);
        detail::vaxpy(-alpha, v, p);
        detail::vaxpy(-beta, v_old, p);
        const double beta_new = detail::vnorm(p);

        const double delta = gamma * alpha - gamma_old * sigma * beta;
        const double rho1 = std::sqrt(delta * delta + beta_new * beta_new);
        const double rho2 = sigma * alpha + gamma_old * gamma * beta;
        const double rho3 = sigma_old * beta;
        const double gamma_new = delta / rho1;
        const double sigma_new = beta_new / rho1;

        for (std::size_t i = 0; i < n; ++i) {
            const double wi = (v[i] - rho3 * w_old[i] - rho2 * w[i]) / rho1;
            w_old[i] = w[i];
            w[i] = wi;
            x[i] += gamma_new * eta * wi;
        }
        eta = -sigma_new * eta;

        v_old = v;
        if (beta_new > 0.0) {
            v = p;
            detail::vscale(v, 1.0 / beta_new);
        }
        beta = beta_new;
        gamma_old = gamma;
        gamma = gamma_new;
        sigma_old = sigma;
        sigma = sigma_new;

        stats.iterations = k + 1;
        stats.relative_residual = std::abs(eta) / beta1;
        if (stats.relative_residual < rel_tol) {
            stats.converged = true;
            return stats;
        }
        if (beta_new == 0.0) {
            stats.converged = true;
            return stats;
        }
    }
    return stats;
}

// Eigenvalues (and optional eigenvectors) of a symmetric tridiagonal matrix
// by the implicit QL method with Wilkinson shifts (classic tql2 scheme).
// diag/off sized k and k-1.
inline void tridiagonal_eigen(std::vector<double> diag, std::vector<double> off,
                              std::vector<double>& values, std::vector<double>* vectors = nullptr) {
    const int n = static_cast<int>(diag.size());
    off.push_back(0.0);
    std::vector<double>& d = diag;
    std::vector<double>& e = off;
    std::vector<double> z; // row-major: z[k*n + j] = component k of eigenvector j
    if (vectors) {
        z.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;
    }
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 80) throw std::runtime_error("tridiagonal QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, pp = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i], b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) { // rotation annihilated; restart this sweep
                        d[i + 1] -= pp;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - pp;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    pp = s * r;
                    d[i + 1] = g + pp;
                    g = c * r - b;
                    if (vectors) {
                        for (int kk = 0; kk < n; ++kk) {
                            const std::size_t a = static_cast<std::size_t>(kk) * n;
                            const double fz = z[a + i + 1];
                            z[a + i + 1] = s * z[a + i] + c * fz;
                            z[a + i] = c * z[a + i] - s * fz;
                        }
                    }
                }
                if (underflow) continue;
                d[l] -= pp;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    // sort ascending, permuting vectors alongside
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    values.resize(n);
    std::vector<double> zs;
    if (vectors) zs.assign(z.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        values[i] = d[order[i]];
        if (vectors)
            for (int kk = 0; kk < n; ++kk)
                zs[static_cast<std::size_t>(kk) * n + i] = z[static_cast<std::size_t>(kk) * n + order[i]];
    }
    if (vectors) *vectors = std::move(zs);
}

// ---------------------------------------------------------------------------
// Deflated shift-invert Lanczos.

struct EigenPair {
    double value = 0.0;
    Vec vector;
    double residual = 0.0; // ||A v - value v||
    int outer_iterations = 0;
};

struct LanczosOptions {
    double sigma = 0.0;           // shift, strictly below the spectrum
    double inner_rel_tol = 1e-11; // CG tolerance for (A - sigma)^{-1}
    int inner_max_iter = 600;
    int max_outer = 72;           // Lanczos steps per eigenvalue
    double residual_tol = 1e-8;   // absolute, on ||A v - lambda v||
    std::uint64_t seed = 1;
    ApplyFn precond;              // for the shifted inner solves (optional)
    std::vector<Vec> warm_starts; // optional per-eigenvalue initial guesses
};

// Smallest `count` eigenvalues of the self-adjoint operator A, restricted to
// the range of `project` (an orthogonal projector commuting with A). Each
// eigenpair is found by Lanczos on P (A - sigma)^{-1} P with previously
// converged vectors deflated; full reorthogonalization keeps the basis clean.
inline std::vector<EigenPair> smallest_eigenpairs(const ApplyFn& A, const ApplyFn& project,
                                                  std::size_t n, int count,
                                                  const LanczosOptions& opts) {
    std::vector<EigenPair> found;
    Rng rng(opts.seed);

    auto constrain = [&](Vec& v) {
        Vec tmp(n);
        for (int pass = 0; pass < 2; ++pass) {
            if (project) {
                project(v, tmp);
                v.swap(tmp);
            }
            for (const auto& f : found) detail::vaxpy(-detail::vdot(f.vector, v), f.vector, v);
        }
    };

    const ApplyFn shifted = [&](const Vec& in, Vec& out) {
        A(in, out);
        detail::vaxpy(-opts.sigma, in, out);
    };

    for (int j = 0; j < count; ++j) {
        Vec v0(n);
        if (j < static_cast<int>(opts.warm_starts.size()) && opts.warm_starts[j].size() == n) {
            v0 = opts.warm_starts[j];
            for (std::size_t i = 0; i < n; ++i) v0[i] += 1e-6 * rng.normal();
        } else {
            for (auto& x : v0) x = rng.normal();
        }
        constrain(v0);
        double nrm = detail::vnorm(v0);
        if (nrm < 1e-14) { // subspace exhausted
            break;
        }
        detail::vscale(v0, 1.0 / nrm);

        std::vector<Vec> basis{v0};
        std::vector<double> alpha, beta;
        EigenPair best;
        best.residual = std::numeric_limits<double>::infinity();

        Vec w(n), tmp(n);
        double prev_checkpoint = std::numeric_limits<double>::infinity();
        int flat_checks = 0;
        for (int k = 0; k < opts.max_outer; ++k) {
            const Vec& vk = basis[static_cast<std::size_t>(k)];
            // inexactness here only slows outer convergence; the residual of
            // every accepted pair is measured directly on A below
            auto stats = conjugate_gradient(shifted, vk, w, opts.inner_rel_tol, opts.inner_max_iter,
                                            opts.precond, 60);
#ifdef FRACGS_TRACE
            std::fprintf(stderr, "[lanczos] eig %d outer %d cg %d (%.1e) best %.3e\n", j, k,
                         stats.iterations, stats.relative_residual, best.residual);
#endif
            (void)stats;
            constrain(w);
            alpha.push_back(detail::vdot(w, vk));
            // full reorthogonalization (twice) subsumes the three-term recurrence
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) detail::vaxpy(-detail::vdot(q, w), q, w);
            const double b = detail::vnorm(w);

            // Ritz extraction every few steps
            const bool last = (k + 1 == opts.max_outer) || b < 1e-13;
            if ((k + 1) % 3 == 0 || last) {
                std::vector<double> vals, vecs;
                std::vector<double> dg = alpha, off = beta;
                tridiagonal_eigen(dg, off, vals, &vecs);
                const int m = static_cast<int>(alpha.size());
                // largest Ritz value of (A - sigma)^{-1} <-> smallest eigenvalue of A
                const int pos = m - 1;
                Vec y(n, 0.0);
                for (int q = 0; q < m; ++q)
                    detail::vaxpy(vecs[static_cast<std::size_t>(q) * m + pos], basis[static_cast<std::size_t>(q)], y);
                const double ynrm = detail::vnorm(y);
                if (ynrm > 0) detail::vscale(y, 1.0 / ynrm);
                // residual through the projected operator (identical to the
                // plain residual whenever the projector commutes with A)
                A(y, tmp);
                constrain(tmp);
                const double lam = detail::vdot(y, tmp);
                detail::vaxpy(-lam, y, tmp);
                const double res = detail::vnorm(tmp);
                if (res < best.residual) {
                    best.value = lam;
                    best.vector = y;
                    best.residual = res;
                    best.outer_iterations = k + 1;
                }
                if (best.residual <= opts.residual_tol) break;
                // inside a spectral cluster the residual plateaus; stop once
                // the pair is at least certificate-grade (residual small
                // against the value, so |value| - residual stays meaningful)
                const bool certificate_ok = best.residual < 0.3 * std::abs(best.value);
                if (best.residual > 0.9 * prev_checkpoint) {
                    ++flat_checks;
                    if (flat_checks >= 4 && certificate_ok) break;
                    if (flat_checks >= 12) break;
                } else {
                    flat_checks = 0;
                }
                prev_checkpoint = best.residual;
            }
            if (b < 1e-13) break;
            detail::vscale(w, 1.0 / b);
            beta.push_back(b);
            basis.push_back(w);
        }
        if (!best.vector.empty()) found.push_back(std::move(best));
    }
    std::sort(found.begin(), found.end(), [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
    return found;
}

} // namespace fracgs
