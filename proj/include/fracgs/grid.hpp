// Periodic tensor grid on [-L, L)^N and its frequency lattice.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracgs {

inline constexpr double kPi = 3.14159265358979323846;

// Uniform periodic grid: M points per dimension on [-L, L), frequency
// lattice xi_k = pi*k/L with k in {-M/2, ..., M/2-1} per dimension.
struct GridSpec {
    int dims = 1;          // N
    int points = 0;        // M per dimension, even
    double half_width = 0; // L

    std::size_t size() const {
        std::size_t n = 1;
        for (int d = 0; d < dims; ++d) n *= static_cast<std::size_t>(points);
        return n;
    }
    double spacing() const { return 2.0 * half_width / points; }      // h
    double freq_step() const { return kPi / half_width; }             // d(xi)
    double cell_volume() const { return std::pow(spacing(), dims); }  // h^N
    double freq_cell_volume() const { return std::pow(freq_step(), dims); }

    // Physical coordinate of index i in one dimension.
    double coord(int i) const { return -half_width + i * spacing(); }
    // Signed integer frequency of DFT index i (i in [0, M)): k in [-M/2, M/2-1].
    int freq_index(int i) const { return (i <= points / 2 - 1) ? i : i - points; }
    double freq(int i) const { return freq_index(i) * freq_step(); }
    bool is_nyquist(int i) const { return i == points / 2; }
    int origin_index() const { return points / 2; } // x = 0

    // Decode a flat row-major index into per-dimension indices.
    void decode(std::size_t flat, std::array<int, 3>& idx) const {
        for (int d = dims - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(flat % points);
            flat /= points;
        }
    }
    std::size_t encode(const std::array<int, 3>& idx) const {
        std::size_t flat = 0;
        for (int d = 0; d < dims; ++d) flat = flat * points + static_cast<std::size_t>(idx[d]);
        return flat;
    }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.dims == b.dims && a.points == b.points && a.half_width == b.half_width;
    }
};

inline GridSpec make_grid(int dims, int points, double half_width) {
    if (dims < 1 || dims > 3) throw std::invalid_argument("dims must be 1, 2 or 3");
    if (points < 2 || points % 2 != 0) throw std::invalid_argument("M must be even");
    if (!(half_width > 0)) throw std::invalid_argument("L must be positive");
    // Guard the total point count before anyone allocates M^N values.
    long double total = std::pow(static_cast<long double>(points), dims);
    if (total > 1e9L) throw std::invalid_argument("grid too large: M^N exceeds addressable budget");
    return GridSpec{dims, points, half_width};
}

} // namespace fracgs
