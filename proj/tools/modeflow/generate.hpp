#pragma once

// Synthetic data generators (`modeflow gen`). Outputs are pure functions of the
// parameters and the seed.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "modeflow/barrier_tunneling.hpp"
#include "modeflow/double_slit.hpp"
#include "modeflow/fringe_analysis.hpp"
#include "modeflow/io/report.hpp"
#include "run_context.hpp"

namespace modeflow::cli {

struct FringeGenParams {
    std::string source = "slit"; // slit, lines-a, lines-b
    double d = 1.0, k = 1e4, x_screen = 1e7, beta = 1e-10, alpha = 1.0;
    int n_max = 4;
    std::size_t samples = 4096;
    double noise = 0.0; // additive Gaussian, sigma relative to the peak intensity
    std::uint64_t seed = 7;

    json to_json() const
    {
        return {{"source", source}, {"d", d}, {"k", k}, {"x_screen", x_screen}, {"beta", beta}, {"alpha", alpha},
                {"n_max", n_max}, {"samples", samples}, {"noise", noise}};
    }
};

/// Two harmonic families standing in for the two measured fringe profiles.
inline std::vector<Tone> family_tones(const std::string& which)
{
    if (which == "lines-a") return {{9, 1.0, 0.0}, {18, 0.5, 0.4}, {29, 0.3, 1.1}, {37, 0.2, 2.0}};
    return {{6, 0.8, 0.0}, {12, 0.4, 0.7}, {19, 0.25, 1.3}, {25, 0.15, 2.2}};
}

inline FringeProfile generate_fringes(const FringeGenParams& g)
{
    if (g.samples < 64) throw ValidationError("--samples must be >= 64");
    if (!(g.noise >= 0.0)) throw ValidationError("--noise must be >= 0");
    FringeProfile p;
    if (g.source == "slit") {
        SlitConfig c;
        c.d = g.d;
        c.k = g.k;
        c.x_screen = g.x_screen;
        c.beta = g.beta;
        c.alpha = g.alpha;
        c.n_max = g.n_max;
        try {
            c.validate();
        } catch (const Error& e) {
            throw ValidationError(e.what());
        }
        if (!(c.alpha > 0.0)) throw ValidationError("--alpha must be > 0 for mode-summed fringes");
        p = pattern_profile(screen_pattern(c, PatternKind::ModeSummed, g.samples), "synthetic double-slit");
    } else if (g.source == "lines-a" || g.source == "lines-b") {
        p = tone_profile(family_tones(g.source), 4.0, g.samples, 4.0);
        p.source = "synthetic " + g.source;
    } else {
        throw ValidationError("--source must be slit, lines-a or lines-b");
    }
    if (g.noise > 0.0) {
        const double peak = *std::max_element(p.intensities.begin(), p.intensities.end());
        std::mt19937_64 rng(g.seed);
        std::normal_distribution<double> z(0.0, g.noise * peak);
        for (auto& v : p.intensities) v = std::max(0.0, v + z(rng));
    }
    return p;
}

struct CurrentGenParams {
    std::string preset = "plot-d";
    std::optional<double> c1, c2, kappa1, kappa2, offset;
    std::size_t points = 20;
    double gap_min = 0.0, gap_max = 7.6, noise = 0.02;
    std::uint64_t seed = 1;

    TunnelFit model() const
    {
        TunnelFit f = preset == "plot-e" ? TunnelFit::plot_e() : TunnelFit::plot_d();
        if (c1) f.c1 = *c1;
        if (c2) f.c2 = *c2;
        if (kappa1) f.kappa1 = *kappa1;
        if (kappa2) f.kappa2 = *kappa2;
        if (offset) f.offset = *offset;
        return f;
    }

    json to_json() const
    {
        return {{"preset", preset}, {"model", io::to_json(model())}, {"points", points},
                {"gap_min", gap_min}, {"gap_max", gap_max}, {"noise", noise}};
    }
};

inline CurrentSamples generate_currents(const CurrentGenParams& g)
{
    if (g.preset != "plot-d" && g.preset != "plot-e") throw ValidationError("--preset must be plot-d or plot-e");
    try {
        const auto m = g.model();
        m.validate();
        return synthesize_currents(m, uniform_gaps(g.gap_min, g.gap_max, g.points), g.noise, g.seed);
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
}

} // namespace modeflow::cli
