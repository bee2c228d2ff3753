#pragma once

// Deterministic flow on configuration space x action-phase circle. A family of
// trajectories generated by one principal function S carries a density F(x, Phi)
// that is constant along the characteristics
//   dx/dt = S'(x)/m,   dPhi/dt = L/eta,   L = p^2/2m - V.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modeflow/core/error.hpp"
#include "modeflow/core/fft.hpp"
#include "modeflow/core/grid.hpp"
#include "modeflow/potential.hpp"

namespace modeflow {

/// Sampled solution of Hamilton's equations with the action accumulated along it.
struct Characteristic {
    std::vector<double> times;
    std::vector<double> positions;
    std::vector<double> momenta;
    std::vector<double> actions;

    std::size_t size() const noexcept { return times.size(); }
};

namespace detail {

inline double force(const PotentialSpec& v, double x)
{
    return std::visit(
        [x](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FreePotential> || std::is_same_v<T, RectangularBarrier>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, HarmonicPotential>) {
                return -p.stiffness * x;
            } else {
                const double u = (x - p.grid.x_min()) / p.grid.spacing();
                if (!(u >= 0.0) || u >= static_cast<double>(p.grid.size() - 1))
                    throw DomainError("integrate_characteristic: trajectory left the tabulated potential at x = "
                                      + std::to_string(x));
                const auto i = static_cast<std::size_t>(u);
                const double f = -(p.values[i + 1] - p.values[i]) / p.grid.spacing();
                if (!std::isfinite(f)) throw DomainError("integrate_characteristic: non-finite force");
                return f;
            }
        },
        v.variant());
}

struct DriftState {
    double x;
    double p;
    double v_here; // potential value of the region the particle is in
    double action;
};

// Free flight through a piecewise-constant barrier. Edge crossings conserve energy:
// the particle refracts when it has enough kinetic energy and reflects otherwise.
inline void barrier_drift(DriftState& st, const RectangularBarrier& b, double mass, double duration)
{
    double remaining = duration;
    const double edges[2] = {b.left, b.left + b.width};
    for (int guard = 0; remaining > 0.0; ++guard) {
        if (guard > 1000) throw Error("integrate_characteristic: too many barrier events in one step");
        double t_hit = remaining;
        int hit = -1;
        if (st.p != 0.0) {
            for (int e = 0; e < 2; ++e) {
                const double tau = (edges[e] - st.x) * mass / st.p;
                if (tau > 0.0 && tau < t_hit) {
                    t_hit = tau;
                    hit = e;
                }
            }
        }
        st.action += t_hit * (st.p * st.p / (2.0 * mass) - st.v_here);
        remaining -= t_hit;
        if (hit < 0) {
            st.x += st.p * t_hit / mass;
            break;
        }
        st.x = edges[hit];
        const bool entering = (hit == 0) == (st.p > 0.0);
        const double v_other = entering ? b.height : 0.0;
        const double kinetic = st.p * st.p / (2.0 * mass);
        if (kinetic > v_other - st.v_here) {
            const double sign = st.p > 0.0 ? 1.0 : -1.0;
            st.p = sign * std::sqrt(2.0 * mass * (kinetic - (v_other - st.v_here)));
            st.v_here = v_other;
        } else {
            st.p = -st.p;
        }
    }
}

} // namespace detail

/// Leapfrog (kick-drift-kick) trajectory from (x0, p0). The action is accumulated
/// with the midpoint rule, s += h (p_half^2/2m - V(x_mid)). The step is shrunk
/// slightly if needed so the last sample lands on t_final.
inline Characteristic integrate_characteristic(double x0, double p0, const PotentialSpec& v, double mass,
                                               double t_final, double dt)
{
    if (!(dt > 0.0) || !(t_final > 0.0)) throw DomainError("integrate_characteristic: dt and t_final must be > 0");
    if (!(mass > 0.0)) throw DomainError("integrate_characteristic: mass must be > 0");
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
    const double h = t_final / static_cast<double>(steps);

    Characteristic c;
    c.times.reserve(steps + 1);
    c.positions.reserve(steps + 1);
    c.momenta.reserve(steps + 1);
    c.actions.reserve(steps + 1);
    auto record = [&c](double t, double x, double p, double s) {
        c.times.push_back(t);
        c.positions.push_back(x);
        c.momenta.push_back(p);
        c.actions.push_back(s);
    };

    double x = x0, p = p0, s = 0.0;
    record(0.0, x, p, s);

    if (const auto* b = std::get_if<RectangularBarrier>(&v.variant())) {
        detail::DriftState st{x, p, v.value(x), 0.0};
        for (std::size_t k = 1; k <= steps; ++k) {
            detail::barrier_drift(st, *b, mass, h);
            record(static_cast<double>(k) * h, st.x, st.p, st.action);
        }
        return c;
    }

    double f = detail::force(v, x);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double p_half = p + 0.5 * h * f;
        const double x_mid = x + 0.5 * h * p_half / mass;
        s += h * (p_half * p_half / (2.0 * mass) - v.value(x_mid));
        x += h * p_half / mass;
        f = detail::force(v, x);
        p = p_half + 0.5 * h * f;
        record(static_cast<double>(k) * h, x, p, s);
    }
    return c;
}

/// Largest mismatch between the finite-difference action rate (s_{k+1}-s_k)/h and
/// the Lagrangian averaged over the step, relative to max(|L|, |E|).
inline double action_consistency_error(const Characteristic& c, const PotentialSpec& v, double mass)
{
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
        const double h = c.times[k + 1] - c.times[k];
        const double rate = (c.actions[k + 1] - c.actions[k]) / h;
        auto lagrangian = [&](std::size_t i) {
            return c.momenta[i] * c.momenta[i] / (2.0 * mass) - v.value(c.positions[i]);
        };
        auto energy = [&](std::size_t i) {
            return c.momenta[i] * c.momenta[i] / (2.0 * mass) + v.value(c.positions[i]);
        };
        const double l_mid = 0.5 * (lagrangian(k) + lagrangian(k + 1));
        const double scale = std::max({std::abs(l_mid), std::abs(energy(k)), 1e-300});
        worst = std::max(worst, std::abs(rate - l_mid) / scale);
    }
    return worst;
}

/// Principal function S sampled on a grid at one instant.
struct PrincipalFunctionField {
    SpatialGrid grid;
    std::vector<double> s_values;
    double time = 0.0;

    PrincipalFunctionField(SpatialGrid g, std::vector<double> s, double t) : grid(g), s_values(std::move(s)), time(t)
    {
        if (s_values.size() != grid.size()) throw ShapeError("PrincipalFunctionField: size differs from grid");
        for (double v : s_values)
            if (!std::isfinite(v)) throw DomainError("PrincipalFunctionField: non-finite action value");
    }

    /// dS/dx, central differences inside, one-sided at the two ends (S is not periodic).
    std::vector<double> gradient() const
    {
        const std::size_t n = s_values.size();
        const double dx = grid.spacing();
        std::vector<double> g(n);
        for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (s_values[i + 1] - s_values[i - 1]) / (2.0 * dx);
        g[0] = (s_values[1] - s_values[0]) / dx;
        g[n - 1] = (s_values[n - 1] - s_values[n - 2]) / dx;
        return g;
    }
};

/// S(x, t) = p0 x - p0^2 t / 2m: the free family with a single momentum p0.
inline PrincipalFunctionField principal_function_free(double p0, double mass, double t, const SpatialGrid& grid)
{
    if (!(mass > 0.0)) throw DomainError("principal_function_free: mass must be > 0");
    std::vector<double> s(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s[i] = p0 * grid.x(i) - p0 * p0 * t / (2.0 * mass);
    return {grid, std::move(s), t};
}

/// Nonnegative density on (x, Phi) cells, row-major with Phi varying fastest.
struct FamilyDensity {
    SpatialGrid grid;
    PhaseGrid phase_grid;
    std::vector<double> values;

    FamilyDensity(SpatialGrid g, PhaseGrid pg, std::vector<double> v) : grid(g), phase_grid(pg), values(std::move(v))
    {
        if (values.size() != grid.size() * phase_grid.size()) throw ShapeError("FamilyDensity: value count mismatch");
        for (double f : values)
            if (!(f >= 0.0) || !std::isfinite(f)) throw DomainError("FamilyDensity: cells must be finite and >= 0");
    }

    double& at(std::size_t ix, std::size_t jphi) { return values[ix * phase_grid.size() + jphi]; }
    double at(std::size_t ix, std::size_t jphi) const { return values[ix * phase_grid.size() + jphi]; }

    /// Integral of F over x and Phi.
    double total_mass() const
    {
        double s = 0.0;
        for (double f : values) s += f;
        return s * grid.spacing() * phase_grid.spacing();
    }
};

/// Integral over Phi for each x (the periodic trapezoid rule).
inline std::vector<double> marginal_phi(const FamilyDensity& f)
{
    const std::size_t nx = f.grid.size(), np = f.phase_grid.size();
    std::vector<double> out(nx, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < np; ++j) s += f.at(i, j);
        out[i] = s * f.phase_grid.spacing();
    }
    return out;
}

namespace detail {

inline double wrap_index(double u, std::size_t n)
{
    const double period = static_cast<double>(n);
    double w = std::fmod(u, period);
    if (w < 0.0) w += period;
    if (w >= period) w -= period;
    return w;
}

inline double bilinear_periodic(const FamilyDensity& f, double u, double v)
{
    const std::size_t nx = f.grid.size(), np = f.phase_grid.size();
    u = wrap_index(u, nx);
    v = wrap_index(v, np);
    const auto i0 = static_cast<std::size_t>(u);
    const auto j0 = static_cast<std::size_t>(v);
    const double a = u - static_cast<double>(i0);
    const double b = v - static_cast<double>(j0);
    const std::size_t i1 = (i0 + 1) % nx, j1 = (j0 + 1) % np;
    return (1.0 - a) * ((1.0 - b) * f.at(i0, j0) + b * f.at(i0, j1)) + a * ((1.0 - b) * f.at(i1, j0) + b * f.at(i1, j1));
}

inline double lerp_nonperiodic(std::span<const double> y, double u)
{
    const auto n = y.size();
    if (u <= 0.0) return y[0];
    if (u >= static_cast<double>(n - 1)) return y[n - 1];
    const auto i = static_cast<std::size_t>(u);
    const double a = u - static_cast<double>(i);
    return (1.0 - a) * y[i] + a * y[i + 1];
}

} // namespace detail

/// Semi-Lagrangian transport of F through the family flow. s_fields[k] holds S at
/// t0 + k dt, so the run takes s_fields.size() - 1 steps. Within each step the
/// velocity is S'/m and the phase rate is L/eta with L = dS/dt + S'^2/m, both taken
/// at the step midpoint; departure points use a two-pass midpoint estimate and
/// values are pulled back by periodic bilinear interpolation.
inline FamilyDensity advect_family(const FamilyDensity& f0, std::span<const PrincipalFunctionField> s_fields,
                                   double eta, double mass, double dt)
{
    if (!(eta > 0.0)) throw DomainError("advect_family: eta must be > 0");
    if (!(mass > 0.0)) throw DomainError("advect_family: mass must be > 0");
    if (!(dt > 0.0)) throw DomainError("advect_family: dt must be > 0");
    if (s_fields.size() < 2) throw ConfigError("advect_family: need at least two principal-function snapshots");
    const SpatialGrid& grid = f0.grid;
    const std::size_t nx = grid.size(), np = f0.phase_grid.size();
    const double dx = grid.spacing(), dphi = f0.phase_grid.spacing();
    for (std::size_t k = 0; k < s_fields.size(); ++k) {
        if (!(s_fields[k].grid == grid)) throw ShapeError("advect_family: principal function grid differs from density grid");
        const double expected = s_fields[0].time + static_cast<double>(k) * dt;
        if (std::abs(s_fields[k].time - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
            throw ConfigError("advect_family: principal function snapshots are not spaced by dt");
    }

    FamilyDensity cur = f0;
    std::vector<double> next(cur.values.size());
    std::vector<double> vel(nx), omega(nx), xdep(nx);
    for (std::size_t k = 0; k + 1 < s_fields.size(); ++k) {
        const auto g0 = s_fields[k].gradient();
        const auto g1 = s_fields[k + 1].gradient();
        for (std::size_t i = 0; i < nx; ++i) {
            const double grad = 0.5 * (g0[i] + g1[i]);
            const double dsdt = (s_fields[k + 1].s_values[i] - s_fields[k].s_values[i]) / dt;
            vel[i] = grad / mass;
            omega[i] = (dsdt + grad * grad / mass) / eta;
        }
        // departure points: x_d = x - dt v(x - dt v(x)/2)
        std::vector<double> umid(nx);
        for (std::size_t i = 0; i < nx; ++i) {
            const double u = static_cast<double>(i);
            umid[i] = u - 0.5 * dt * vel[i] / dx;
            xdep[i] = u - dt * detail::lerp_nonperiodic(vel, umid[i]) / dx;
        }
        // forward map x -> x + dt v(x) must stay monotone, and so must its pull-back
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const double jacobian = 1.0 + dt * (vel[i + 1] - vel[i]) / dx;
            if (!(jacobian > 0.0) || !(xdep[i + 1] - xdep[i] > 0.0))
                throw CausticError("advect_family: characteristic map folds near x = " + std::to_string(grid.x(i)));
        }
        for (std::size_t i = 0; i < nx; ++i) {
            const double w = detail::lerp_nonperiodic(omega, umid[i]);
            for (std::size_t j = 0; j < np; ++j) {
                const double vdep = static_cast<double>(j) - dt * w / dphi;
                next[i * np + j] = detail::bilinear_periodic(cur, xdep[i], vdep);
            }
        }
        cur.values.swap(next);
    }
    return cur;
}

/// Fourier coefficients c_n = (1/2pi) int psi(Phi) e^{+i n Phi} dPhi of a periodic
/// real sequence, so psi = sum_n c_n e^{-i n Phi}. Orders run over [-N/2, N/2).
inline std::map<int, cplx> phase_fourier_coefficients(std::span<const double> psi)
{
    const std::size_t np = psi.size();
    CVector buf(psi.begin(), psi.end());
    ifft_inplace(buf); // (1/N) sum_j psi_j e^{+2 pi i jn/N}
    std::map<int, cplx> out;
    for (std::size_t k = 0; k < np; ++k) {
        int n = static_cast<int>(k);
        if (k >= np / 2) n -= static_cast<int>(np);
        out[n] = buf[k];
    }
    return out;
}

/// Mode fields Psi_hat(x, n) of psi = +sqrt(F) under the unitary convention, so that
/// sum_n |Psi_hat(x, n)|^2 = (1/2pi) int F(x, Phi) dPhi at every x.
inline std::map<int, CVector> family_modes(const FamilyDensity& f)
{
    const std::size_t nx = f.grid.size(), np = f.phase_grid.size();
    std::map<int, CVector> out;
    std::vector<double> column(np);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < np; ++j) {
            const double v = f.at(i, j);
            if (v < 0.0) throw DomainError("family_modes: negative density cell");
            column[j] = std::sqrt(v);
        }
        for (const auto& [n, c] : phase_fourier_coefficients(column)) {
            auto& field = out[n];
            if (field.empty()) field.assign(nx, cplx{});
            field[i] = c;
        }
    }
    return out;
}

/// Phase picked up by mode n along a free characteristic, n (p0^2/2m) t / eta.
inline double free_transport_phase(int n, double eta, double p0, double mass, double t)
{
    const double unit = p0 * p0 / (2.0 * mass) * t / eta;
    return static_cast<double>(n) * unit;
}

struct TransportCheckGrid {
    double x_min = 0.0;
    double x_max = 32.0;
    std::size_t num_x = 256;
    std::size_t num_phi = 64;
    double profile_center = 8.0;
    double profile_width = 1.5;
};

/// Transports a smooth mode-n profile of the free family two ways: by the closed
/// form Psi_hat(x, n, t) = e^{i n L t/eta} Psi_hat(x - p0 t/m, n, 0), and by
/// advecting F = psi^2 through the family flow and re-extracting mode n. Returns
/// max |difference| / max |closed form|.
inline double transport_mode_check(int n, double eta, double p0, double mass, double t,
                                   const TransportCheckGrid& cfg = {})
{
    if (!(t > 0.0)) throw DomainError("transport_mode_check: t must be > 0");
    const SpatialGrid grid(cfg.x_min, cfg.x_max, cfg.num_x);
    const PhaseGrid phases(cfg.num_phi);
    const int order = std::abs(n);
    const int harmonic = order == 0 ? 1 : order;

    auto envelope = [&](double x) {
        const double d = x - cfg.profile_center;
        return std::exp(-d * d / (2.0 * cfg.profile_width * cfg.profile_width));
    };
    auto psi0 = [&](double x, double phi) { return envelope(x) * (1.0 + 0.5 * std::cos(harmonic * phi - 0.3)); };

    std::vector<double> values(grid.size() * phases.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < phases.size(); ++j) {
            const double v = psi0(grid.x(i), phases.phi(j));
            values[i * phases.size() + j] = v * v;
        }
    const FamilyDensity f0(grid, phases, std::move(values));

    // The free family has uniform velocity, so one semi-Lagrangian step of length t
    // follows the characteristics exactly.
    const std::vector<PrincipalFunctionField> s{principal_function_free(p0, mass, 0.0, grid),
                                                principal_function_free(p0, mass, t, grid)};
    const FamilyDensity ft = advect_family(f0, s, eta, mass, t);
    const CVector numeric = family_modes(ft).at(n);

    // Closed form from the initial mode field, shifted by p0 t / m. The mode
    // coefficient of psi0 at fixed x is extracted on the same phase grid.
    const double shift = p0 * t / mass;
    const cplx rotation = std::polar(1.0, free_transport_phase(n, eta, p0, mass, t));
    std::vector<double> column(phases.size());
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double xs = grid.x(i) - shift;
        xs = grid.x_min() + detail::wrap_index((xs - grid.x_min()) / grid.spacing(), grid.size()) * grid.spacing();
        for (std::size_t j = 0; j < phases.size(); ++j) column[j] = psi0(xs, phases.phi(j));
        const cplx exact = rotation * phase_fourier_coefficients(column).at(n);
        worst = std::max(worst, std::abs(numeric[i] - exact));
        scale = std::max(scale, std::abs(exact));
    }
    return worst / scale;
}

} // namespace modeflow
