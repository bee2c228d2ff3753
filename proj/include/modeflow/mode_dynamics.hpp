#pragma once

// Evolution of mode wavefunctions under the mode-n Schrodinger-form equation
//   i (eta/n) dPsi/dt = -(eta/n)^2/(2m) Psi'' + V Psi
// and the mode-weighted density P(x) = sum_n a(n) |Psi(x, n)|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <future>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "modeflow/core/error.hpp"
#include "modeflow/core/fft.hpp"
#include "modeflow/core/grid.hpp"
#include "modeflow/potential.hpp"

namespace modeflow {

/// eta = hbar convention for physical-unit runs (J s).
inline constexpr double hbar_si = 1.0545718e-34;

/// The effective quantum of action of mode n: eta / n.
inline double effective_planck(double eta, int n)
{
    if (n < 1) throw DomainError("effective_planck: mode index must be >= 1 (n <= 0 is unsupported)");
    if (!(eta > 0.0)) throw DomainError("effective_planck: eta must be > 0");
    return eta / static_cast<double>(n);
}

/// Complex amplitude Psi(x, n, t) on a periodic grid.
struct ModeWavefunction {
    SpatialGrid grid;
    CVector values;
    int n = 1;
    double eta = 1.0;
    double time = 0.0;

    ModeWavefunction(SpatialGrid g, CVector v, int mode, double action_unit, double t = 0.0)
        : grid(g), values(std::move(v)), n(mode), eta(action_unit), time(t)
    {
        if (values.size() != grid.size()) throw ShapeError("ModeWavefunction: value count must equal grid size");
        if (n < 1) throw DomainError("ModeWavefunction: mode index must be >= 1");
        if (!(eta > 0.0)) throw DomainError("ModeWavefunction: eta must be > 0");
    }

    double hbar_eff() const { return effective_planck(eta, n); }

    /// L2 norm squared, sum |Psi_i|^2 dx.
    double norm_squared() const
    {
        double s = 0.0;
        for (const auto& v : values) s += std::norm(v);
        return s * grid.spacing();
    }

    double norm() const { return std::sqrt(norm_squared()); }

    ModeWavefunction& normalize()
    {
        const double nrm = norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw DomainError("ModeWavefunction: cannot normalize a zero or non-finite state");
        for (auto& v : values) v /= nrm;
        return *this;
    }

    std::vector<double> density() const
    {
        std::vector<double> out(values.size());
        std::transform(values.begin(), values.end(), out.begin(), [](cplx v) { return std::norm(v); });
        return out;
    }

    double mean_position() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += grid.x(i) * std::norm(values[i]);
        return s * grid.spacing() / norm_squared();
    }

    double position_variance() const
    {
        const double mu = mean_position();
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double d = grid.x(i) - mu;
            s += d * d * std::norm(values[i]);
        }
        return s * grid.spacing() / norm_squared();
    }
};

/// Normalized Gaussian exp(-(x-x0)^2/(4 sigma^2) + i k0 (x - x0)); sigma is the
/// standard deviation of |psi|^2.
inline CVector gaussian_packet(const SpatialGrid& grid, double x0, double sigma, double k0)
{
    if (!(sigma > 0.0)) throw DomainError("gaussian_packet: sigma must be > 0");
    CVector out(grid.size());
    const double amp = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid.x(i) - x0;
        out[i] = amp * std::exp(cplx(-d * d / (4.0 * sigma * sigma), k0 * d));
    }
    return out;
}

/// Per-mode coefficients a(n) of the mode-weighted Born rule.
class ModeWeights {
public:
    ModeWeights() = default;

    ModeWeights(std::map<int, double> weights, bool mark_normalized = false)
        : weights_(std::move(weights)), normalized_(mark_normalized)
    {
        for (const auto& [n, a] : weights_) {
            if (n < 1) throw DomainError("ModeWeights: mode index must be >= 1");
            if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("ModeWeights: weights must be finite and >= 0");
        }
        if (normalized_ && std::abs(total() - 1.0) > 1e-12)
            throw DomainError("ModeWeights: weights marked normalized do not sum to 1");
    }

    /// Rescales so the weights sum to one.
    static ModeWeights normalized(std::map<int, double> weights)
    {
        double s = 0.0;
        for (const auto& [n, a] : weights) s += a;
        if (!(s > 0.0)) throw DomainError("ModeWeights: cannot normalize weights with zero sum");
        for (auto& [n, a] : weights) a /= s;
        ModeWeights w(std::move(weights));
        w.normalized_ = std::abs(w.total() - 1.0) <= 1e-12;
        return w;
    }

    /// a(n) = exp(-alpha (n - 1)) for n = 1..n_max, normalized.
    static ModeWeights geometric(double alpha, int n_max)
    {
        if (n_max < 1) throw DomainError("ModeWeights: n_max must be >= 1");
        std::map<int, double> w;
        for (int n = 1; n <= n_max; ++n) w[n] = std::exp(-alpha * (n - 1));
        return normalized(std::move(w));
    }

    bool contains(int n) const { return weights_.contains(n); }

    double at(int n) const
    {
        auto it = weights_.find(n);
        if (it == weights_.end()) throw ConfigError("ModeWeights: no weight supplied for mode n = " + std::to_string(n));
        return it->second;
    }

    double total() const
    {
        double s = 0.0;
        for (const auto& [n, a] : weights_) s += a;
        return s;
    }

    int n_max() const { return weights_.empty() ? 0 : weights_.rbegin()->first; }
    bool is_normalized() const noexcept { return normalized_; }
    const std::map<int, double>& map() const noexcept { return weights_; }

private:
    std::map<int, double> weights_;
    bool normalized_ = false;
};

struct EvolutionParams {
    double mass = 1.0;
    double dt = 1e-3;      // negative values step backwards in time
    std::size_t num_steps = 1;

    void validate() const
    {
        if (!(mass > 0.0)) throw DomainError("EvolutionParams: mass must be > 0");
        if (dt == 0.0 || !std::isfinite(dt)) throw DomainError("EvolutionParams: dt must be finite and nonzero");
    }

    /// Explicit-scheme stability scale dx^2 m n / eta. Split-step stepping does not
    /// need it; it is reported so runs can flag poorly resolved phase rotation.
    double stability_limit(const SpatialGrid& grid, int n, double eta) const
    {
        return grid.spacing() * grid.spacing() * mass * n / eta;
    }

    bool within_stability_advisory(const SpatialGrid& grid, int n, double eta) const
    {
        return std::abs(dt) <= stability_limit(grid, n, eta);
    }
};

/// Symmetric split-step Fourier propagation with hbar_eff = eta / n:
/// half potential kick, full kinetic drift in k-space, half potential kick.
inline ModeWavefunction evolve_mode(const ModeWavefunction& psi, const PotentialSpec& v, const EvolutionParams& p)
{
    p.validate();
    const SpatialGrid& grid = psi.grid;
    const std::size_t n = grid.size();
    const double hbar = psi.hbar_eff();
    const std::vector<double> vx = v.sample(grid);

    CVector half_kick(n), drift(n);
    for (std::size_t i = 0; i < n; ++i) half_kick[i] = std::polar(1.0, -vx[i] * p.dt / (2.0 * hbar));
    for (std::size_t i = 0; i < n; ++i) {
        const double k = grid.wavenumber(i);
        drift[i] = std::polar(1.0, -hbar * k * k * p.dt / (2.0 * p.mass));
    }

    ModeWavefunction out = psi;
    CVector& w = out.values;
    for (std::size_t step = 0; step < p.num_steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) w[i] *= half_kick[i];
        fft_inplace(w);
        for (std::size_t i = 0; i < n; ++i) w[i] *= drift[i];
        ifft_inplace(w);
        for (std::size_t i = 0; i < n; ++i) w[i] *= half_kick[i];
    }
    out.time = psi.time + static_cast<double>(p.num_steps) * p.dt;
    return out;
}

/// Evolves each mode on its own thread. Results are bitwise identical to the
/// sequential loop: modes share no state and FFT plans are deterministic.
inline std::vector<ModeWavefunction> evolve_modes(std::span<const ModeWavefunction> modes, const PotentialSpec& v,
                                                  const EvolutionParams& p)
{
    std::vector<std::future<ModeWavefunction>> jobs;
    jobs.reserve(modes.size());
    for (const auto& m : modes)
        jobs.push_back(std::async(std::launch::async, [&m, &v, &p] { return evolve_mode(m, v, p); }));
    std::vector<ModeWavefunction> out;
    out.reserve(modes.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

/// P(x) = sum_n a(n) |Psi(x, n)|^2.
inline std::vector<double> ensemble_density(std::span<const ModeWavefunction> modes, const ModeWeights& w)
{
    if (modes.empty()) throw ConfigError("ensemble_density: no modes supplied");
    const SpatialGrid& grid = modes.front().grid;
    std::vector<double> out(grid.size(), 0.0);
    for (const auto& m : modes) {
        if (!(m.grid == grid)) throw ShapeError("ensemble_density: modes do not share one grid");
        const double a = w.at(m.n);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * std::norm(m.values[i]);
    }
    return out;
}

/// Evolves psi with (eta, n) and with (eta/n, 1) from the same initial values and
/// returns the maximum pointwise difference of the two results.
inline double mode_scaling_equivalence(const ModeWavefunction& psi, const PotentialSpec& v, const EvolutionParams& p)
{
    const ModeWavefunction a = evolve_mode(psi, v, p);
    ModeWavefunction rescaled(psi.grid, psi.values, 1, psi.hbar_eff(), psi.time);
    const ModeWavefunction b = evolve_mode(rescaled, v, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    return worst;
}

/// Phase of each sample unwrapped along the grid (nearest branch).
inline std::vector<double> unwrapped_phase(std::span<const cplx> values)
{
    std::vector<double> out(values.size());
    if (values.empty()) return out;
    out[0] = std::arg(values[0]);
    for (std::size_t i = 1; i < values.size(); ++i) {
        // increment measured as arg(psi_i conj(psi_{i-1})) always lies in (-pi, pi]
        out[i] = out[i - 1] + std::arg(values[i] * std::conj(values[i - 1]));
    }
    return out;
}

struct WkbResidual {
    double value = 0.0;            // max relative phase-gradient mismatch over the window
    std::size_t points_used = 0;
    std::size_t points_excluded = 0; // amplitude nodes inside the window hull
    bool node_excluded() const noexcept { return points_excluded > 0; }
};

/// Compares grad(arg Psi) with n grad(S)/eta over the window where
/// |Psi| > 1e-6 max|Psi|. Gradients are central differences on the grid.
inline WkbResidual wkb_phase_residual(const ModeWavefunction& psi, std::span<const double> s_field)
{
    const std::size_t n = psi.grid.size();
    if (s_field.size() != n) throw ShapeError("wkb_phase_residual: action field size differs from grid");
    double amax = 0.0;
    for (const auto& v : psi.values) amax = std::max(amax, std::abs(v));
    if (!(amax > 0.0)) throw DomainError("wkb_phase_residual: zero wavefunction");
    const double floor = 1e-6 * amax;

    std::vector<bool> inside(n);
    std::size_t first = n, last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        inside[i] = std::abs(psi.values[i]) > floor;
        if (inside[i]) {
            first = std::min(first, i);
            last = std::max(last, i);
        }
    }

    const std::vector<double> phase = unwrapped_phase(psi.values);
    const double dx = psi.grid.spacing();
    const double scale = static_cast<double>(psi.n) / psi.eta;

    WkbResidual r;
    for (std::size_t i = first + 1; i < last; ++i) {
        if (!(inside[i - 1] && inside[i] && inside[i + 1])) {
            ++r.points_excluded;
            continue;
        }
        const double dphase = (phase[i + 1] - phase[i - 1]) / (2.0 * dx);
        const double expected = scale * (s_field[i + 1] - s_field[i - 1]) / (2.0 * dx);
        if (expected == 0.0) throw DomainError("wkb_phase_residual: action gradient vanishes inside the window");
        r.value = std::max(r.value, std::abs(dphase - expected) / std::abs(expected));
        ++r.points_used;
    }
    return r;
}

} // namespace modeflow
