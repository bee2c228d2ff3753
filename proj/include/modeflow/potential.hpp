#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "modeflow/core/error.hpp"
#include "modeflow/core/grid.hpp"

namespace modeflow {

struct FreePotential {};

/// V(x) = height on [left, left + width), zero elsewhere.
struct RectangularBarrier {
    double height = 0.0;
    double left = 0.0;
    double width = 1.0;
};

/// V(x) = stiffness * x^2 / 2.
struct HarmonicPotential {
    double stiffness = 1.0;
};

/// Values sampled on a spatial grid, linearly interpolated between samples.
struct TabulatedPotential {
    SpatialGrid grid;
    std::vector<double> values;
};

/// Static external potential V(x).
class PotentialSpec {
public:
    using Variant = std::variant<FreePotential, RectangularBarrier, HarmonicPotential, TabulatedPotential>;

    PotentialSpec() = default;
    PotentialSpec(FreePotential p) : v_(p) {}
    PotentialSpec(RectangularBarrier b) : v_(b)
    {
        if (!(b.height >= 0.0)) throw DomainError("RectangularBarrier: height must be >= 0");
        if (!(b.width > 0.0)) throw DomainError("RectangularBarrier: width must be > 0");
    }
    PotentialSpec(HarmonicPotential h) : v_(h)
    {
        if (!std::isfinite(h.stiffness)) throw DomainError("HarmonicPotential: stiffness must be finite");
    }
    PotentialSpec(TabulatedPotential t) : v_(std::move(t))
    {
        const auto& tab = std::get<TabulatedPotential>(v_);
        if (tab.values.size() != tab.grid.size())
            throw ShapeError("TabulatedPotential: value count must equal grid num_points");
    }

    static PotentialSpec constant(const SpatialGrid& grid, double value)
    {
        return TabulatedPotential{grid, std::vector<double>(grid.size(), value)};
    }

    const Variant& variant() const noexcept { return v_; }
    bool is_free() const noexcept { return std::holds_alternative<FreePotential>(v_); }

    /// Point evaluation. Tabulated potentials interpolate linearly and return nullopt
    /// outside the tabulated range (no periodic extension for characteristics).
    std::optional<double> try_value(double x) const
    {
        return std::visit(
            [x](const auto& p) -> std::optional<double> {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, FreePotential>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, RectangularBarrier>) {
                    return (x >= p.left && x < p.left + p.width) ? p.height : 0.0;
                } else if constexpr (std::is_same_v<T, HarmonicPotential>) {
                    return 0.5 * p.stiffness * x * x;
                } else {
                    const double u = (x - p.grid.x_min()) / p.grid.spacing();
                    if (!(u >= 0.0) || u > static_cast<double>(p.grid.size() - 1)) return std::nullopt;
                    auto i = static_cast<std::size_t>(u);
                    if (i >= p.grid.size() - 1) return p.values.back();
                    const double f = u - static_cast<double>(i);
                    const double v = (1.0 - f) * p.values[i] + f * p.values[i + 1];
                    if (!std::isfinite(v)) return std::nullopt;
                    return v;
                }
            },
            v_);
    }

    double value(double x) const
    {
        auto v = try_value(x);
        if (!v) throw DomainError("potential: evaluation outside tabulated range at x = " + std::to_string(x));
        return *v;
    }

    /// Samples V on every grid point. Tabulated potentials must be defined on this grid.
    std::vector<double> sample(const SpatialGrid& grid) const
    {
        if (const auto* tab = std::get_if<TabulatedPotential>(&v_)) {
            if (!(tab->grid == grid)) throw ShapeError("potential: tabulated grid differs from evolution grid");
            return tab->values;
        }
        std::vector<double> out(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) out[i] = value(grid.x(i));
        return out;
    }

private:
    Variant v_ = FreePotential{};
};

} // namespace modeflow
