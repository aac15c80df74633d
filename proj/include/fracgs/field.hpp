// Sampled fields on the periodic grid and their discrete Fourier transforms.
//
// Transform convention is the unitary one,
//     uhat(xi_k) = (2*pi)^{-N/2} * h^N * sum_j u(x_j) e^{-i xi_k . x_j},
//     u(x_j)     = (2*pi)^{-N/2} * dxi^N * sum_k uhat(xi_k) e^{+i xi_k . x_j},
// so that the discrete Parseval identity
//     h^N sum |u_j|^2 = dxi^N sum |uhat_k|^2
// holds exactly. The x-origin offset folds into the transforms as a
// per-index parity sign, since e^{-i xi_k x_j} = (-1)^{k} e^{-2 pi i jk/M}.
#pragma once

#include <fftw3.h>

#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "fracgs/grid.hpp"

namespace fracgs {

struct RealField {
    GridSpec grid;
    std::vector<double> values;

    RealField() = default;
    explicit RealField(const GridSpec& g, double fill = 0.0)
        : grid(g), values(g.size(), fill) {}
};

struct SpectralField {
    GridSpec grid;
    std::vector<std::complex<double>> coeffs; // DFT index layout, unitary values

    SpectralField() = default;
    explicit SpectralField(const GridSpec& g)
        : grid(g), coeffs(g.size()) {}
};

namespace detail {

// Process-wide FFTW plan cache. Planning is not thread safe, execution with
// the new-array interface is; plans are created FFTW_ESTIMATE|FFTW_UNALIGNED
// so any caller buffer is admissible and planning stays deterministic.
class FftPlans {
  public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    void execute(const GridSpec& g, int sign, std::complex<double>* in, std::complex<double>* out) {
        fftw_plan plan = acquire(g, sign);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(out));
    }

  private:
    FftPlans() = default;
    ~FftPlans() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan acquire(const GridSpec& g, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(g.dims, g.points, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> a(g.size()), b(g.size());
        std::vector<int> n(g.dims, g.points);
        fftw_plan plan = fftw_plan_dft(g.dims, n.data(),
                                       reinterpret_cast<fftw_complex*>(a.data()),
                                       reinterpret_cast<fftw_complex*>(b.data()),
                                       sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw planning failed");
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// Parity of the sum of per-dimension indices, walked in row-major order.
// parity(flat) = (-1)^{i_1 + ... + i_N}; used for the origin phase. A wrap
// from M-1 to 0 is an odd parity change because M is even, so one flip per
// visited dimension is exact.
template <class Fn>
inline void for_each_parity(const GridSpec& g, Fn&& fn) {
    std::array<int, 3> idx{0, 0, 0};
    const std::size_t n = g.size();
    int parity = 0;
    for (std::size_t flat = 0; flat < n; ++flat) {
        fn(flat, parity);
        for (int d = g.dims - 1; d >= 0; --d) {
            idx[d]++;
            parity ^= 1;
            if (idx[d] < g.points) break;
            idx[d] = 0;
        }
    }
}

} // namespace detail

inline SpectralField to_spectral(const RealField& u) {
    SpectralField out(u.grid);
    const std::size_t n = u.grid.size();
    std::vector<std::complex<double>> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = u.values[i];
    detail::FftPlans::instance().execute(u.grid, FFTW_FORWARD, in.data(), out.coeffs.data());
    const double scale = std::pow(2.0 * kPi, -0.5 * u.grid.dims) * u.grid.cell_volume();
    detail::for_each_parity(u.grid, [&](std::size_t flat, int parity) {
        out.coeffs[flat] *= parity ? -scale : scale;
    });
    return out;
}

// Inverse transform; the imaginary residue is discarded (fields produced by
// symmetric multiplier operations are real up to roundoff).
inline RealField to_real(const SpectralField& uh) {
    const std::size_t n = uh.grid.size();
    std::vector<std::complex<double>> in(n), out(n);
    const double scale = std::pow(2.0 * kPi, -0.5 * uh.grid.dims) * uh.grid.freq_cell_volume();
    detail::for_each_parity(uh.grid, [&](std::size_t flat, int parity) {
        in[flat] = parity ? -uh.coeffs[flat] : uh.coeffs[flat];
    });
    detail::FftPlans::instance().execute(uh.grid, FFTW_BACKWARD, in.data(), out.data());
    RealField u(uh.grid);
    for (std::size_t i = 0; i < n; ++i) u.values[i] = scale * out[i].real();
    return u;
}

// ---------------------------------------------------------------------------
// Inner products and norms (physical-space quadrature weight h^N).

inline double l2_inner(const RealField& u, const RealField& v) {
    if (!(u.grid == v.grid)) throw std::invalid_argument("grid mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) acc += u.values[i] * v.values[i];
    return acc * u.grid.cell_volume();
}

inline double l2_norm(const RealField& u) { return std::sqrt(l2_inner(u, u)); }

inline double linf_norm(const RealField& u) {
    double m = 0.0;
    for (double x : u.values) m = std::max(m, std::abs(x));
    return m;
}

inline double lp_norm(const RealField& u, double p) {
    double acc = 0.0;
    for (double x : u.values) acc += std::pow(std::abs(x), p);
    return std::pow(acc * u.grid.cell_volume(), 1.0 / p);
}

// integral of u^q dx with the sign-preserving power
inline double integral_power(const RealField& u, double q) {
    double acc = 0.0;
    for (double x : u.values) acc += std::pow(std::abs(x), q);
    return acc * u.grid.cell_volume();
}

// ---------------------------------------------------------------------------
// Pointwise algebra helpers.

inline RealField operator+(const RealField& a, const RealField& b) {
    RealField r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] + b.values[i];
    return r;
}

inline RealField operator-(const RealField& a, const RealField& b) {
    RealField r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] - b.values[i];
    return r;
}

inline RealField operator*(double c, const RealField& a) {
    RealField r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = c * a.values[i];
    return r;
}

inline void axpy(double c, const RealField& x, RealField& y) {
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += c * x.values[i];
}

// sign-preserving power: |v|^{q-1} v
inline RealField signed_power(const RealField& u, double q) {
    RealField r(u.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const double x = u.values[i];
        r.values[i] = (x == 0.0) ? 0.0 : std::copysign(std::pow(std::abs(x), q), x);
    }
    return r;
}

inline RealField pointwise_mul(const RealField& a, const RealField& b) {
    RealField r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] * b.values[i];
    return r;
}

// ---------------------------------------------------------------------------
// Fourier-symbol application. The symbol receives |xi|^2 and multiplies the
// unitary coefficients; the unpaired Nyquist rows are zeroed to keep symbol
// applications real-symmetric on real fields.

template <class Symbol>
void apply_symbol_inplace(SpectralField& uh, Symbol&& symbol, bool zero_nyquist = true) {
    const GridSpec& g = uh.grid;
    std::array<int, 3> idx{0, 0, 0};
    const std::size_t n = g.size();
    for (std::size_t flat = 0; flat < n; ++flat) {
        g.decode(flat, idx);
        bool nyq = false;
        double xi2 = 0.0;
        for (int d = 0; d < g.dims; ++d) {
            if (g.is_nyquist(idx[d])) nyq = true;
            const double xi = g.freq(idx[d]);
            xi2 += xi * xi;
        }
        if (nyq && zero_nyquist)
            uh.coeffs[flat] = 0.0;
        else
            uh.coeffs[flat] *= symbol(xi2);
    }
}

template <class Symbol>
RealField apply_symbol(const RealField& u, Symbol&& symbol, bool zero_nyquist = true) {
    SpectralField uh = to_spectral(u);
    apply_symbol_inplace(uh, symbol, zero_nyquist);
    return to_real(uh);
}

// Spectral partial derivative along dimension d (Nyquist row zeroed).
inline RealField spectral_derivative(const RealField& u, int dim) {
    if (dim < 0 || dim >= u.grid.dims) throw std::invalid_argument("derivative dimension out of range");
    SpectralField uh = to_spectral(u);
    const GridSpec& g = uh.grid;
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < uh.coeffs.size(); ++flat) {
        g.decode(flat, idx);
        bool nyq = false;
        for (int d = 0; d < g.dims; ++d)
            if (g.is_nyquist(idx[d])) nyq = true;
        if (nyq)
            uh.coeffs[flat] = 0.0;
        else
            uh.coeffs[flat] *= std::complex<double>(0.0, g.freq(idx[dim]));
    }
    return to_real(uh);
}

// ---------------------------------------------------------------------------
// Deterministic RNG. std::*_distribution sequences are implementation
// defined, so uniforms and normals are derived from the raw engine directly.

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    double uniform() { // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }
    std::uint64_t next() {
        // xorshift* step seeded through splitmix for robustness to poor seeds
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Random smooth real field: Gaussian spectral envelope exp(-|xi|^2/xi_c^2),
// conjugate-symmetric by construction, Nyquist-free. Used by property suites.
inline RealField random_smooth_field(const GridSpec& g, std::uint64_t seed, double xi_cut = 0.0) {
    if (xi_cut <= 0.0) xi_cut = 0.25 * g.points / 2 * g.freq_step();
    Rng rng(seed);
    RealField white(g);
    for (auto& v : white.values) v = rng.normal();
    RealField smooth = apply_symbol(white, [&](double xi2) { return std::exp(-xi2 / (xi_cut * xi_cut)); });
    const double nrm = l2_norm(smooth);
    return (nrm > 0) ? (1.0 / nrm) * smooth : smooth;
}

// Centered Gaussian bump exp(-|x|^2 / (2 w^2)).
inline RealField gaussian_field(const GridSpec& g, double width = 1.0) {
    RealField u(g);
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < u.values.size(); ++flat) {
        g.decode(flat, idx);
        double r2 = 0.0;
        for (int d = 0; d < g.dims; ++d) {
            const double x = g.coord(idx[d]);
            r2 += x * x;
        }
        u.values[flat] = std::exp(-r2 / (2.0 * width * width));
    }
    return u;
}

} // namespace fracgs
