// Principal-value singular-integral route to (-Delta)^s, used as an
// independent cross-check of the Fourier-multiplier route.
//
//   (-Delta)^s u(x) = C(N,s) P.V. int (u(x) - u(y)) / |x-y|^{N+2s} dy,
//   C(N,s) = 4^s * s * Gamma(N/2 + s) / (pi^{N/2} * Gamma(1 - s)),
//
// normalized so that the Fourier symbol is exactly |xi|^{2s} (checked against
// the multiplier on Gaussians; for N=1, s=1/2 the constant is 1/pi).
#pragma once

#include <cmath>
#include <stdexcept>

#include "fracgs/field.hpp"

namespace fracgs {

inline double singular_integral_constant(int dims, double s) {
    return std::pow(4.0, s) * s * std::tgamma(0.5 * dims + s) /
           (std::pow(kPi, 0.5 * dims) * std::tgamma(1.0 - s));
}

namespace detail {

// int_{[-rho,rho]^N} |z|^{2-N-2s} dz, the kernel-weighted second moment of
// the near-singularity block. 1D closed form; 2D reduced to a polar angle
// quadrature.
inline double inner_square_moment(int dims, double s, double rho) {
    if (dims == 1) return 2.0 * std::pow(rho, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    // 8 * int_0^{pi/4} int_0^{rho/cos t} r^{1-2s} dr dt
    const int K = 512;
    double acc = 0.0;
    const double dt = (kPi / 4.0) / K;
    for (int i = 0; i < K; ++i) {
        const double t = (i + 0.5) * dt;
        acc += std::pow(rho / std::cos(t), 2.0 - 2.0 * s);
    }
    return 8.0 * acc * dt / (2.0 - 2.0 * s);
}

inline double sphere_area(int dims) { return dims == 1 ? 2.0 : 2.0 * kPi; }

} // namespace detail

// Pointwise (-Delta)^s u at a grid point, by quadrature of the PV integral.
// Grid sum outside an axis-aligned inner block, quadratic Taylor model inside
// it, and an analytic far-field tail (u treated as zero beyond the box, with
// the box/ball sliver cancelled against the same grid quadrature so the
// residual error is h^2-controlled).
inline double frac_laplacian_oracle(const RealField& u, double s, const std::array<int, 3>& point) {
    const GridSpec& g = u.grid;
    if (g.dims > 2) throw std::invalid_argument("singular-integral oracle supports N <= 2 only");
    if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    for (int d = 0; d < g.dims; ++d) {
        const double x = g.coord(point[d]);
        if (std::abs(x) > 0.5 * g.half_width)
            throw std::invalid_argument("evaluation point too close to the box boundary");
    }

    const double h = g.spacing();
    const int inner_cells = 3;              // inner block half-width in cells
    const double rho = (inner_cells + 0.5) * h; // aligns with cell edges
    const std::size_t pflat = g.encode(point);
    const double ux = u.values[pflat];

    // Quadratic model on the inner block: the odd terms integrate to zero,
    // int (u(x)-u(y)) K dy ~ -(Lap u / 2N') * int |z|^2 K with the block's
    // symmetric second moment; for the square block int z_d^2 K = (1/N) int |z|^2 K.
    double lap = 0.0;
    for (int d = 0; d < g.dims; ++d) {
        std::array<int, 3> ip = point, im = point;
        ip[d] = (point[d] + 1) % g.points;
        im[d] = (point[d] - 1 + g.points) % g.points;
        lap += (u.values[g.encode(ip)] - 2.0 * ux + u.values[g.encode(im)]) / (h * h);
    }
    const double inner = -(lap / (2.0 * g.dims)) * detail::inner_square_moment(g.dims, s, rho);

    // Far-field distance: nearest box boundary from x.
    double r_far = g.half_width;
    for (int d = 0; d < g.dims; ++d)
        r_far = std::min(r_far, g.half_width - std::abs(g.coord(point[d])));

    double outer = 0.0;       // grid quadrature outside the inner block
    double sliver_quad = 0.0; // grid quadrature of K over {|y-x| > r_far}
    std::array<int, 3> idx{0, 0, 0};
    const std::size_t n = g.size();
    for (std::size_t flat = 0; flat < n; ++flat) {
        g.decode(flat, idx);
        bool in_block = true;
        double r2 = 0.0;
        for (int d = 0; d < g.dims; ++d) {
            int dj = idx[d] - point[d];
            if (std::abs(dj) > inner_cells) in_block = false;
            const double z = dj * h;
            r2 += z * z;
        }
        if (in_block) continue;
        const double r = std::sqrt(r2);
        const double kern = std::pow(r, -(g.dims + 2.0 * s));
        outer += (ux - u.values[flat]) * kern;
        if (r > r_far) sliver_quad += kern;
    }
    outer *= g.cell_volume();
    sliver_quad *= g.cell_volume();

    const double tail_ball = detail::sphere_area(g.dims) * std::pow(r_far, -2.0 * s) / (2.0 * s);
    const double tail = ux * (tail_ball - sliver_quad);

    return singular_integral_constant(g.dims, s) * (inner + outer + tail);
}

} // namespace fracgs
