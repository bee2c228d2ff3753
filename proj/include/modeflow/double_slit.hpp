#pragma once

// Closed-form two-source (double-slit) intensities. Slits sit at y = +d and y = -d,
// the screen at x = X. theta = 2 k d sin(phi) with sin(phi) = y / sqrt(X^2 + y^2).

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "modeflow/core/error.hpp"

namespace modeflow {

struct SlitConfig {
    double d = 1.0;        // half slit separation
    double x_screen = 100.0;
    double k = 10.0;       // n = 1 beam wavenumber
    double beta = 1e-4;    // Gaussian spread exp(-beta (y -+ d)^2)
    double a0 = 1.0;
    double alpha = 1.0;    // mode amplitudes A0 exp(-alpha (n-1)/2)
    int n_max = 1;

    void validate() const
    {
        if (!(d > 0.0)) throw DomainError("SlitConfig: d must be > 0");
        if (!(x_screen > 0.0)) throw DomainError("SlitConfig: x_screen must be > 0");
        if (!(k > 0.0)) throw DomainError("SlitConfig: k must be > 0");
        if (!(beta > 0.0)) throw DomainError("SlitConfig: beta must be > 0");
        if (!(alpha >= 0.0)) throw DomainError("SlitConfig: alpha must be >= 0");
        if (n_max < 1) throw DomainError("SlitConfig: n_max must be >= 1");
    }

    /// d^2 << X^2, the regime in which the simplified denominators hold.
    bool far_field() const { return d * d < 1e-2 * x_screen * x_screen; }

    double sin_phi(double y) const { return y / std::hypot(x_screen, y); }
    double theta(double y) const { return 2.0 * k * d * sin_phi(y); }

    /// Inverse of theta(y) on the screen.
    double y_at_theta(double th) const
    {
        const double s = th / (2.0 * k * d);
        if (!(std::abs(s) < 1.0)) throw DomainError("SlitConfig: theta outside the reachable range");
        return x_screen * s / std::sqrt(1.0 - s * s);
    }
};

/// Two-source superposition at (x, y): each term A0 e^{-beta (y -+ d)^2} e^{i k.(r -+ d e_y)}
/// / |r -+ d e_y|^{1/2}, with one wave vector k directed along r from the origin.
inline std::complex<double> amplitude_two_sources(const SlitConfig& cfg, double x, double y)
{
    const double r1 = std::hypot(x, y - cfg.d);
    const double r2 = std::hypot(x, y + cfg.d);
    if (r1 == 0.0 || r2 == 0.0) throw DomainError("amplitude_two_sources: evaluation at a source point");
    const double r = std::hypot(x, y);
    // k.(r -+ d e_y) with k = k r_hat
    const double kr = cfg.k * r;
    const double kd = cfg.k * cfg.d * y / r;
    const auto term = [&](double dy, double dist, double phase) {
        return std::polar(cfg.a0 * std::exp(-cfg.beta * dy * dy) / std::sqrt(dist), phase);
    };
    // the common phase is applied last so the relative phase stays exact for large k r
    return (term(y - cfg.d, r1, -kd) + term(y + cfg.d, r2, kd)) * std::polar(1.0, kr);
}

struct SingleModeIntensity {
    double total = 0.0;
    double hump1 = 0.0;
    double hump2 = 0.0;
    double interference = 0.0; // signed
};

/// Three-term single-mode pattern with the interference denominator
/// (X^2 + y^2 - d^2)^{1/2}.
inline SingleModeIntensity intensity_single_mode(const SlitConfig& cfg, double y)
{
    const double x = cfg.x_screen, d = cfg.d, a2 = cfg.a0 * cfg.a0;
    SingleModeIntensity out;
    out.hump1 = a2 * std::exp(-2.0 * cfg.beta * (y - d) * (y - d)) / std::hypot(x, y - d);
    out.hump2 = a2 * std::exp(-2.0 * cfg.beta * (y + d) * (y + d)) / std::hypot(x, y + d);
    out.interference = 2.0 * a2 * std::exp(-2.0 * cfg.beta * (y * y + d * d)) * std::cos(cfg.theta(y))
                       / std::sqrt(x * x + y * y - d * d);
    out.total = out.hump1 + out.hump2 + out.interference;
    return out;
}

/// |amplitude_two_sources|^2 at the screen split the same way; the interference
/// denominator is the exact geometric mean (|r - d e_y| |r + d e_y|)^{1/2}.
inline SingleModeIntensity intensity_exact_geometry(const SlitConfig& cfg, double y)
{
    const double x = cfg.x_screen, d = cfg.d, a2 = cfg.a0 * cfg.a0;
    const double r1 = std::hypot(x, y - d), r2 = std::hypot(x, y + d);
    SingleModeIntensity out;
    out.hump1 = a2 * std::exp(-2.0 * cfg.beta * (y - d) * (y - d)) / r1;
    out.hump2 = a2 * std::exp(-2.0 * cfg.beta * (y + d) * (y + d)) / r2;
    out.interference = 2.0 * a2 * std::exp(-2.0 * cfg.beta * (y * y + d * d)) * std::cos(cfg.theta(y)) / std::sqrt(r1 * r2);
    out.total = out.hump1 + out.hump2 + out.interference;
    return out;
}

/// sum_{n=1}^N 2 cos(n theta) = -1 + sin((N + 1/2) theta) / sin(theta / 2).
inline double dirichlet_sum(double theta, long n_terms)
{
    if (n_terms < 1) throw DomainError("dirichlet_sum: n_terms must be >= 1");
    const double half = std::sin(0.5 * theta);
    const auto nn = static_cast<double>(n_terms);
    if (std::abs(half) > 1e-8) return -1.0 + std::sin((nn + 0.5) * theta) / half;
    // 2N - theta^2 sum n^2
    return 2.0 * nn - theta * theta * nn * (nn + 1.0) * (2.0 * nn + 1.0) / 6.0;
}

/// Sum over n = 1..N of e^{-alpha(n-1)} [humps + e^{-2 beta (y^2+d^2)} 2 cos(n theta)],
/// all over (X^2 + y^2)^{1/2}, times A0^2.
inline SingleModeIntensity mode_summed_terms(const SlitConfig& cfg, double y)
{
    const double a2 = cfg.a0 * cfg.a0, d = cfg.d;
    const double denom = std::hypot(cfg.x_screen, y);
    const double th = cfg.theta(y);
    double weight_sum = 0.0, fringe = 0.0;
    const double r = std::exp(-cfg.alpha);
    const std::complex<double> z = std::polar(r, th);
    if (cfg.n_max <= 64 || std::abs(1.0 - z) < 1e-3) {
        for (int n = 1; n <= cfg.n_max; ++n) {
            const double w = std::exp(-cfg.alpha * (n - 1));
            weight_sum += w;
            fringe += w * 2.0 * std::cos(n * th);
        }
    } else if (cfg.alpha == 0.0) {
        weight_sum = cfg.n_max;
        fringe = dirichlet_sum(th, cfg.n_max);
    } else {
        // finite geometric series: sum r^{n-1} e^{i n theta} = e^{i theta} (1 - z^N) / (1 - z)
        const auto zn = std::pow(z, cfg.n_max);
        weight_sum = std::expm1(-cfg.alpha * cfg.n_max) / std::expm1(-cfg.alpha);
        fringe = 2.0 * (std::polar(1.0, th) * (1.0 - zn) / (1.0 - z)).real();
    }
    SingleModeIntensity out;
    out.hump1 = weight_sum * a2 * std::exp(-2.0 * cfg.beta * (y - d) * (y - d)) / denom;
    out.hump2 = weight_sum * a2 * std::exp(-2.0 * cfg.beta * (y + d) * (y + d)) / denom;
    out.interference = a2 * std::exp(-2.0 * cfg.beta * (y * y + d * d)) * fringe / denom;
    out.total = out.hump1 + out.hump2 + out.interference;
    return out;
}

inline double mode_summed_intensity(const SlitConfig& cfg, double y) { return mode_summed_terms(cfg, y).total; }

/// sum_{n>=1} e^{-alpha(n-1)} 2 cos(n theta) = 2(cos theta - r) / (1 - 2 r cos theta + r^2), r = e^{-alpha}.
/// The value includes the factor 2 of the interference term, so alpha -> inf gives 2 cos theta.
inline double interference_closed_form(double theta, double alpha)
{
    if (!(alpha > 0.0))
        throw DomainError("interference_closed_form: alpha must be > 0; use dirichlet_sum for equal weights");
    const double r = std::exp(-alpha);
    const double c = std::cos(theta);
    return 2.0 * (c - r) / (2.0 * r * (1.0 - c) + (r - 1.0) * (r - 1.0));
}

/// Two humps only: A0^2 [e^{-2 beta (y-d)^2} + e^{-2 beta (y+d)^2}] / (X^2 + y^2)^{1/2}.
inline double classical_pattern(const SlitConfig& cfg, double y)
{
    const double a2 = cfg.a0 * cfg.a0, d = cfg.d;
    return a2 * (std::exp(-2.0 * cfg.beta * (y - d) * (y - d)) + std::exp(-2.0 * cfg.beta * (y + d) * (y + d)))
           / std::hypot(cfg.x_screen, y);
}

/// Mode-summed intensity averaged over one full theta period centred on theta(y),
/// sampled uniformly in theta, divided by sum_n e^{-alpha(n-1)}. With equal weights
/// the interference part averages out and the result approaches classical_pattern.
inline double theta_averaged_intensity(const SlitConfig& cfg, double y, std::size_t samples)
{
    const double centre = cfg.theta(y);
    double weight_sum = 0.0;
    for (int n = 1; n <= cfg.n_max; ++n) weight_sum += std::exp(-cfg.alpha * (n - 1));
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double th = centre - std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(samples);
        acc += mode_summed_intensity(cfg, cfg.y_at_theta(th));
    }
    return acc / static_cast<double>(samples) / weight_sum;
}

struct ScreenPattern {
    std::vector<double> y;
    std::vector<SingleModeIntensity> terms;
};

enum class PatternKind { SingleMode, ExactGeometry, ModeSummed, Classical };

/// Default screen span |y| <= 3d + 5/sqrt(beta).
inline double default_screen_half_width(const SlitConfig& cfg) { return 3.0 * cfg.d + 5.0 / std::sqrt(cfg.beta); }

inline ScreenPattern screen_pattern(const SlitConfig& cfg, PatternKind kind, std::size_t samples = 4096,
                                    double half_width = 0.0)
{
    cfg.validate();
    if (samples < 2) throw DomainError("screen_pattern: need at least two samples");
    if (half_width <= 0.0) half_width = default_screen_half_width(cfg);
    ScreenPattern p;
    p.y.resize(samples);
    p.terms.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double y = -half_width + 2.0 * half_width * static_cast<double>(i) / static_cast<double>(samples - 1);
        p.y[i] = y;
        switch (kind) {
        case PatternKind::SingleMode: p.terms[i] = intensity_single_mode(cfg, y); break;
        case PatternKind::ExactGeometry: p.terms[i] = intensity_exact_geometry(cfg, y); break;
        case PatternKind::ModeSummed: p.terms[i] = mode_summed_terms(cfg, y); break;
        case PatternKind::Classical: {
            const double v = classical_pattern(cfg, y);
            p.terms[i] = {v, 0.0, 0.0, 0.0};
            const double a2 = cfg.a0 * cfg.a0, den = std::hypot(cfg.x_screen, y);
            p.terms[i].hump1 = a2 * std::exp(-2.0 * cfg.beta * (y - cfg.d) * (y - cfg.d)) / den;
            p.terms[i].hump2 = a2 * std::exp(-2.0 * cfg.beta * (y + cfg.d) * (y + cfg.d)) / den;
            break;
        }
        }
    }
    return p;
}

/// Indices of strict interior local maxima of the total intensity.
inline std::vector<std::size_t> local_maxima(const ScreenPattern& p)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < p.terms.size(); ++i)
        if (p.terms[i].total > p.terms[i - 1].total && p.terms[i].total >= p.terms[i + 1].total) out.push_back(i);
    return out;
}

} // namespace modeflow
