#pragma once

// Wigner quasi-distribution of a mode wavefunction on its periodic grid,
//   W(x, K) = (1/2pi) int dq e^{-iKq} psi(x + q/2) psi*(x - q/2),
// with the q lattice equal to the x lattice and half-step samples taken from
// the band-limited (spectral) interpolant of psi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "modeflow/core/error.hpp"
#include "modeflow/core/fft.hpp"
#include "modeflow/core/grid.hpp"
#include "modeflow/mode_dynamics.hpp"

namespace modeflow {

struct WignerField {
    SpatialGrid x_grid;
    std::vector<double> k_values; // ascending, spacing 2pi / L
    std::vector<double> values;   // row-major, K fastest
    double max_imag_residue = 0.0; // relative to max |W|, before discarding
    bool boundary_warning = false; // psi has weight near the domain edges

    std::size_t num_x() const noexcept { return x_grid.size(); }
    std::size_t num_k() const noexcept { return k_values.size(); }
    double dk() const noexcept { return 2.0 * std::numbers::pi / x_grid.length(); }
    double at(std::size_t ix, std::size_t ik) const { return values[ix * num_k() + ik]; }

    /// int int W dx dK
    double integral() const
    {
        double s = 0.0;
        for (double v : values) s += v;
        return s * x_grid.spacing() * dk();
    }
};

namespace detail {

// psi(x_i + dx/2) from the band-limited interpolant, Nyquist bin included with
// the same representative frequency as SpatialGrid::wavenumber.
inline CVector half_step_shift(const SpatialGrid& g, std::span<const cplx> psi)
{
    CVector c = fft(psi);
    const double h = 0.5 * g.spacing();
    for (std::size_t l = 0; l < c.size(); ++l) c[l] *= std::polar(1.0, g.wavenumber(l) * h);
    return ifft(c);
}

// Outer eighth of the domain on either side carries more than this fraction of the norm.
inline bool touches_boundary(std::span<const cplx> psi)
{
    const std::size_t n = psi.size(), edge = n / 8;
    double total = 0.0, outer = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(psi[i]);
        total += p;
        if (i < edge || i >= n - edge) outer += p;
    }
    return total > 0.0 && outer > 1e-10 * total;
}

} // namespace detail

/// Wigner transform; exact position marginal by construction, exact momentum
/// marginal for the band-limited interpolant. The correlation lag q spans one
/// domain length, so psi should occupy less than half the domain.
inline WignerField wigner_transform(const ModeWavefunction& psi, unsigned threads = 0)
{
    const SpatialGrid& g = psi.grid;
    const std::size_t n = g.size();
    const auto np = static_cast<std::ptrdiff_t>(n);
    const CVector& full = psi.values;
    const CVector half = detail::half_step_shift(g, full);

    auto wrap = [np](std::ptrdiff_t i) { return static_cast<std::size_t>(((i % np) + np) % np); };
    // psi(x_j + m dx/2)
    auto sample = [&](std::ptrdiff_t j, std::ptrdiff_t m) -> cplx {
        const std::ptrdiff_t r = m >= 0 ? m / 2 : -((-m + 1) / 2); // floor(m / 2)
        return (m - 2 * r == 0) ? full[wrap(j + r)] : half[wrap(j + r)];
    };

    WignerField w{g, std::vector<double>(n), std::vector<double>(n * n), 0.0, detail::touches_boundary(full)};
    // ascending K order: bin l sits at position (l + n/2) mod n
    for (std::size_t l = 0; l < n; ++l) w.k_values[(l + n / 2) % n] = g.wavenumber(l);

    const double scale = g.spacing() / (2.0 * std::numbers::pi);
    std::vector<double> imag_max(n, 0.0);

    auto slice = [&](std::size_t j0, std::size_t j1) {
        CVector corr(n);
        for (std::size_t j = j0; j < j1; ++j) {
            const auto jj = static_cast<std::ptrdiff_t>(j);
            for (std::ptrdiff_t m = -np / 2 + 1; m < np / 2; ++m)
                corr[wrap(m)] = sample(jj, m) * std::conj(sample(jj, -m));
            // lags +-n/2 alias to the same bin; averaging them keeps the sum Hermitian
            const std::ptrdiff_t m = np / 2;
            corr[wrap(m)] = 0.5 * (sample(jj, m) * std::conj(sample(jj, -m)) + sample(jj, -m) * std::conj(sample(jj, m)));
            const CVector spec = fft(corr);
            double im = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                w.values[j * n + (l + n / 2) % n] = scale * spec[l].real();
                im = std::max(im, std::abs(spec[l].imag()));
            }
            imag_max[j] = scale * im;
        }
    };

    if (threads == 0) threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t a = t * chunk, b = std::min(n, a + chunk);
        if (a < b) pool.emplace_back(slice, a, b);
    }
    for (auto& th : pool) th.join();

    double wmax = 0.0;
    for (double v : w.values) wmax = std::max(wmax, std::abs(v));
    const double imax = *std::max_element(imag_max.begin(), imag_max.end());
    w.max_imag_residue = wmax > 0.0 ? imax / wmax : 0.0;
    if (w.max_imag_residue > 1e-9) throw Error("wigner_transform: correlation lost Hermitian symmetry");
    return w;
}

/// int W dK at each x.
inline std::vector<double> marginal_position(const WignerField& w)
{
    std::vector<double> out(w.num_x(), 0.0);
    for (std::size_t i = 0; i < w.num_x(); ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l < w.num_k(); ++l) s += w.at(i, l);
        out[i] = s * w.dk();
    }
    return out;
}

/// int W dx at each K (ascending K order of the field).
inline std::vector<double> marginal_momentum(const WignerField& w)
{
    std::vector<double> out(w.num_k(), 0.0);
    for (std::size_t i = 0; i < w.num_x(); ++i)
        for (std::size_t l = 0; l < w.num_k(); ++l) out[l] += w.at(i, l);
    for (double& v : out) v *= w.x_grid.spacing();
    return out;
}

/// int int max(-W, 0) dx dK
inline double negativity_volume(const WignerField& w)
{
    double s = 0.0;
    for (double v : w.values)
        if (v < 0.0) s -= v;
    return s * w.x_grid.spacing() * w.dk();
}

/// sum_n a(n) int W_n dK
inline std::vector<double> ensemble_marginal(std::span<const ModeWavefunction> modes, const ModeWeights& weights)
{
    if (modes.empty()) throw ConfigError("ensemble_marginal: no modes supplied");
    std::vector<double> out(modes.front().grid.size(), 0.0);
    for (const auto& m : modes) {
        if (!(m.grid == modes.front().grid)) throw ShapeError("ensemble_marginal: modes must share one grid");
        const double a = weights.at(m.n);
        const auto p = marginal_position(wigner_transform(m));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * p[i];
    }
    return out;
}

/// Pointwise average of Wigner fields on one grid (an incoherent mixture).
inline WignerField mix_fields(std::span<const WignerField> fields, std::span<const double> weights)
{
    if (fields.empty() || fields.size() != weights.size()) throw ShapeError("mix_fields: need one weight per field");
    WignerField out = fields.front();
    std::fill(out.values.begin(), out.values.end(), 0.0);
    for (std::size_t f = 0; f < fields.size(); ++f) {
        if (!(fields[f].x_grid == out.x_grid)) throw ShapeError("mix_fields: fields must share one grid");
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += weights[f] * fields[f].values[i];
    }
    return out;
}

} // namespace modeflow
