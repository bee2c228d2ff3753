#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "modeflow/core/error.hpp"

namespace modeflow {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// Uniform periodic grid on [x_min, x_max). The point x_max is identified with x_min.
class SpatialGrid {
public:
    SpatialGrid(double x_min, double x_max, std::size_t num_points)
        : x_min_(x_min), x_max_(x_max), n_(num_points)
    {
        if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
            throw DomainError("SpatialGrid: x_max must exceed x_min");
        if (num_points < 8 || !is_power_of_two(num_points))
            throw DomainError("SpatialGrid: num_points must be a power of two >= 8, got "
                              + std::to_string(num_points));
    }

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t size() const noexcept { return n_; }
    double length() const noexcept { return x_max_ - x_min_; }
    double spacing() const noexcept { return length() / static_cast<double>(n_); }

    double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * spacing(); }

    std::vector<double> points() const
    {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = x(i);
        return out;
    }

    /// Angular wavenumber of FFT bin i (standard unshifted ordering).
    double wavenumber(std::size_t i) const noexcept
    {
        const auto n = static_cast<std::ptrdiff_t>(n_);
        auto j = static_cast<std::ptrdiff_t>(i);
        if (j >= n / 2) j -= n;
        return 2.0 * std::numbers::pi * static_cast<double>(j) / length();
    }

    /// Largest representable |k|.
    double k_max() const noexcept { return std::numbers::pi / spacing(); }

    friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
};

/// Uniform samples phi_j = 2*pi*j/num_phi of the action-phase circle.
class PhaseGrid {
public:
    explicit PhaseGrid(std::size_t num_phi) : n_(num_phi)
    {
        if (num_phi < 8 || !is_power_of_two(num_phi))
            throw DomainError("PhaseGrid: num_phi must be a power of two >= 8, got "
                              + std::to_string(num_phi));
    }

    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return 2.0 * std::numbers::pi / static_cast<double>(n_); }
    double phi(std::size_t j) const noexcept { return static_cast<double>(j) * spacing(); }

    friend bool operator==(const PhaseGrid&, const PhaseGrid&) = default;

private:
    std::size_t n_;
};

} // namespace modeflow
