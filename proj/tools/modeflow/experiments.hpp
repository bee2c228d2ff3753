#pragma once

// Experiment recipes. Each `prepare_*` reads the resolved parameters, builds and
// validates every library object, and returns the job that does the work. Errors
// raised while preparing are validation failures; errors from the job are runtime
// failures.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "modeflow/acceptance.hpp"
#include "modeflow/barrier_tunneling.hpp"
#include "modeflow/double_slit.hpp"
#include "modeflow/family_flow.hpp"
#include "modeflow/fringe_analysis.hpp"
#include "modeflow/io/report.hpp"
#include "modeflow/mode_dynamics.hpp"
#include "modeflow/wigner.hpp"
#include "run_context.hpp"

namespace modeflow::cli {

/// Result of a job: a short summary echoed to stdout and an exit status.
struct JobResult {
    json summary;
    int status = 0;
};

using Job = std::function<JobResult(RunContext&)>;

namespace detail {

inline double num(const json& p, const char* k) { return p.at(k).get<double>(); }
inline std::int64_t whole(const json& p, const char* k) { return p.at(k).get<std::int64_t>(); }
inline std::string str(const json& p, const char* k) { return p.at(k).get<std::string>(); }

inline std::size_t count(const json& p, const char* k)
{
    const auto v = whole(p, k);
    if (v < 0) throw ValidationError(std::string("parameter '") + k + "' must be >= 0");
    return static_cast<std::size_t>(v);
}

inline SlitConfig slit_config(const json& p)
{
    SlitConfig c;
    c.d = num(p, "d");
    c.k = num(p, "k");
    c.x_screen = num(p, "x_screen");
    c.beta = num(p, "beta");
    c.a0 = num(p, "a0");
    c.alpha = num(p, "alpha");
    c.n_max = static_cast<int>(whole(p, "n_max"));
    c.validate();
    return c;
}

inline PotentialSpec potential(const json& p)
{
    const auto kind = str(p, "potential");
    if (kind == "free") return FreePotential{};
    if (kind == "barrier") return RectangularBarrier{num(p, "barrier_height"), num(p, "barrier_left"), num(p, "barrier_width")};
    return HarmonicPotential{num(p, "stiffness")};
}

} // namespace detail

inline Job prepare_evolve(const json& p)
{
    using namespace detail;
    const SpatialGrid grid(num(p, "x_min"), num(p, "x_max"), count(p, "points"));
    const auto modes = p.at("modes").get<std::vector<int>>();
    if (modes.empty()) throw ValidationError("parameter 'modes' must not be empty");
    std::map<int, double> w;
    for (int n : modes) {
        if (n < 1) throw ValidationError("mode indices must be >= 1 (n <= 0 is unsupported)");
        if (w.contains(n)) throw ValidationError("mode " + std::to_string(n) + " listed twice");
        w[n] = std::exp(-num(p, "alpha") * (n - 1));
    }
    const auto weights = ModeWeights::normalized(w);
    const auto v = potential(p);
    const EvolutionParams ep{1.0, num(p, "dt"), count(p, "steps")};
    ep.validate();
    const double eta = 1.0, x0 = num(p, "x0"), sigma = num(p, "sigma"), p0 = num(p, "p0");
    std::vector<ModeWavefunction> initial;
    for (int n : modes) {
        // same momentum p0 in every mode: k = p0 / hbar_eff
        ModeWavefunction psi(grid, gaussian_packet(grid, x0, sigma, p0 * n / eta), n, eta);
        psi.normalize();
        initial.push_back(std::move(psi));
    }

    return [=](RunContext& ctx) {
        const auto finals = evolve_modes(initial, v, ep);
        json modes_report = json::array();
        for (std::size_t i = 0; i < finals.size(); ++i) {
            const auto& f = finals[i];
            const std::string stem = "wavefunction_n" + std::to_string(f.n);
            ctx.write_csv(stem + ".csv", io::wavefunction_table(f));
            ctx.write_json(stem + ".json", io::wavefunction_descriptor(f, stem + ".csv"));
            modes_report.push_back({{"n", f.n},
                                    {"hbar_eff", f.hbar_eff()},
                                    {"weight", weights.at(f.n)},
                                    {"norm_drift", std::abs(f.norm_squared() - 1.0)},
                                    {"mean_position", f.mean_position()},
                                    {"position_variance", f.position_variance()},
                                    {"within_stability_advisory", ep.within_stability_advisory(grid, f.n, eta)}});
        }
        io::Table dens;
        dens.add_column("x", grid.points());
        dens.add_column("initial", ensemble_density(initial, weights));
        dens.add_column("final", ensemble_density(finals, weights));
        ctx.write_csv("ensemble_density.csv", dens);
        json report{{"time", finals.front().time}, {"modes", modes_report}};
        ctx.write_json("report.json", report);
        return JobResult{report};
    };
}

inline Job prepare_double_slit(const json& p)
{
    using namespace detail;
    const auto cfg = slit_config(p);
    const auto samples = count(p, "samples");
    const double half = num(p, "half_width");
    const auto kind_name = str(p, "pattern");
    const PatternKind kind = kind_name == "single-mode" ? PatternKind::SingleMode
                             : kind_name == "exact"     ? PatternKind::ExactGeometry
                             : kind_name == "classical" ? PatternKind::Classical
                                                        : PatternKind::ModeSummed;
    if (samples < 64) throw ValidationError("parameter 'samples' must be >= 64");
    if (kind == PatternKind::ModeSummed && cfg.alpha == 0.0)
        throw ValidationError("mode-summed patterns need alpha > 0; use the classical-limit experiment for equal weights");

    return [=](RunContext& ctx) {
        const auto pattern = screen_pattern(cfg, kind, samples, half);
        ctx.write_csv("pattern.csv", io::screen_table(pattern));
        ctx.write_csv("profile.csv", io::profile_table(pattern_profile(pattern, "double-slit " + kind_name)));
        const auto maxima = local_maxima(pattern);
        json report{{"pattern", kind_name},
                    {"samples", samples},
                    {"half_width", pattern.y.back()},
                    {"far_field", cfg.far_field()},
                    {"fringe_period", std::numbers::pi * cfg.x_screen / (cfg.k * cfg.d)},
                    {"local_maxima", maxima.size()}};
        ctx.write_json("report.json", report);
        return JobResult{report};
    };
}

inline Job prepare_classical_limit(const json& p)
{
    using namespace detail;
    auto cfg = slit_config(p);
    const auto samples = count(p, "samples");
    const auto theta_samples = count(p, "theta_samples");
    if (samples < 2) throw ValidationError("parameter 'samples' must be >= 2");
    if (theta_samples <= static_cast<std::size_t>(cfg.n_max))
        throw ValidationError("parameter 'theta_samples' must exceed n_max so each cos(n theta) averages out");
    double half = num(p, "half_width");
    if (half <= 0.0) half = default_screen_half_width(cfg);
    // the averaging window must stay on the screen: |theta(y)| + pi < 2 k d
    if (!(2.0 * cfg.k * cfg.d * cfg.sin_phi(half) + std::numbers::pi < 2.0 * cfg.k * cfg.d))
        throw ValidationError("screen too wide for a full theta period around its edge; reduce half_width or raise k d");

    return [=](RunContext& ctx) {
        std::vector<double> y(samples), cls(samples), avg(samples), single(samples);
        double worst = 0.0, peak = 0.0;
        for (std::size_t i = 0; i < samples; ++i) {
            y[i] = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(samples - 1);
            cls[i] = classical_pattern(cfg, y[i]);
            avg[i] = theta_averaged_intensity(cfg, y[i], theta_samples);
            single[i] = intensity_single_mode(cfg, y[i]).total;
            peak = std::max(peak, cls[i]);
        }
        for (std::size_t i = 0; i < samples; ++i) worst = std::max(worst, std::abs(avg[i] - cls[i]));
        io::Table t;
        t.add_column("y", y);
        t.add_column("classical", cls);
        t.add_column("theta_averaged", avg);
        t.add_column("single_mode", single);
        ctx.write_csv("classical.csv", t);
        json report{{"n_max", cfg.n_max}, {"theta_samples", theta_samples}, {"max_deviation_relative_to_peak", worst / peak}};
        ctx.write_json("report.json", report);
        return JobResult{report};
    };
}

inline TunnelFit tunnel_preset(const std::string& name) { return name == "plot-e" ? TunnelFit::plot_e() : TunnelFit::plot_d(); }

inline Job prepare_tunnel_fit(const json& p, std::uint64_t seed)
{
    using namespace detail;
    const auto preset = tunnel_preset(str(p, "preset"));
    const double offset = p.at("offset").is_null() ? preset.offset : num(p, "offset");
    const auto file = str(p, "data");
    CurrentSamples data;
    std::string source;
    if (!file.empty()) {
        try {
            data = io::currents_from_table(io::read_csv(file));
        } catch (const Error& e) {
            throw ValidationError(e.what());
        }
        source = file;
    } else {
        const auto n = count(p, "points");
        if (n < 8) throw ValidationError("parameter 'points' must be >= 8");
        data = synthesize_currents(preset, uniform_gaps(num(p, "gap_min"), num(p, "gap_max"), n), num(p, "noise_sigma"), seed);
        source = "synthetic " + str(p, "preset");
    }
    FitOptions opt;
    opt.offset = offset;
    opt.max_iterations = static_cast<int>(whole(p, "max_iterations"));
    const double split_at = num(p, "split_current");
    if (!(split_at > 0.0)) throw ValidationError("parameter 'split_current' must be > 0");

    return [=](RunContext& ctx) {
        if (file.empty()) ctx.write_csv("currents.csv", io::current_table(data));
        const auto r = fit_double_exponential(data, opt);
        json fit = io::to_json(r);
        fit["source"] = source;
        fit["units"] = {{"gap", "angstrom"}, {"current", "ampere"}, {"kappa", "1/angstrom"}};
        if (!r.single_exponential) {
            const auto s = component_split(r.fit, split_at);
            fit["split"] = {{"current", split_at}, {"first", s.first}, {"second", s.second},
                            {"first_share", s.first / s.total()}, {"second_share", s.second / s.total()}};
        }
        std::vector<double> model, first, second;
        for (double g : data.gaps) {
            const auto c = current_components_at(g + r.fit.offset, r.fit);
            model.push_back(c.total());
            first.push_back(c.first);
            second.push_back(c.second);
        }
        io::Table t = io::current_table(data);
        t.add_column("model", model);
        t.add_column("first", first);
        t.add_column("second", second);
        ctx.write_csv("fitted.csv", t);
        ctx.write_json("fit.json", fit);
        return JobResult{fit};
    };
}

inline Job prepare_tunnel_predict(const json& p, bool si_units)
{
    using namespace detail;
    BarrierScenario sc;
    double w_lo, w_hi, length_unit;
    if (si_units) {
        sc.mass = num(p, "mass_me") * si::electron_mass;
        sc.energy = num(p, "energy_ev") * si::electron_volt;
        sc.height = num(p, "height_ev") * si::electron_volt;
        sc.eta = num(p, "eta_js");
        w_lo = num(p, "width_min_angstrom");
        w_hi = num(p, "width_max_angstrom");
        length_unit = si::angstrom;
    } else {
        sc.energy = num(p, "energy");
        sc.height = num(p, "height");
        w_lo = num(p, "width_min");
        w_hi = num(p, "width_max");
        length_unit = 1.0;
    }
    sc.width = w_hi * length_unit;
    sc.validate();
    if (!(w_lo > 0.0 && w_hi > w_lo)) throw ValidationError("need 0 < width_min < width_max");
    const auto n_max = static_cast<int>(whole(p, "n_max"));
    if (n_max < 1) throw ValidationError("parameter 'n_max' must be >= 1");
    const auto given = p.at("weights").get<std::vector<double>>();
    std::map<int, double> raw;
    if (!given.empty()) {
        if (given.size() != static_cast<std::size_t>(n_max))
            throw ValidationError("parameter 'weights' must list n_max values");
        for (int n = 1; n <= n_max; ++n) raw[n] = given[static_cast<std::size_t>(n - 1)];
    } else {
        for (int n = 1; n <= n_max; ++n) raw[n] = std::exp(-num(p, "alpha") * (n - 1));
    }
    const auto weights = ModeWeights::normalized(raw);
    const double rate = num(p, "attempt_rate");
    const auto points = count(p, "points");
    if (points < 2) throw ValidationError("parameter 'points' must be >= 2");
    const auto mc = mode_resolved_current(sc, weights, rate);

    return [=](RunContext& ctx) {
        std::vector<double> widths(points), total(points, 0.0);
        std::vector<std::vector<double>> per(static_cast<std::size_t>(n_max), std::vector<double>(points));
        for (std::size_t i = 0; i < points; ++i) {
            widths[i] = w_lo + (w_hi - w_lo) * static_cast<double>(i) / static_cast<double>(points - 1);
            for (int n = 1; n <= n_max; ++n) {
                const double c = mc.at_width(n, widths[i] * length_unit);
                per[static_cast<std::size_t>(n - 1)][i] = c;
                total[i] += c;
            }
        }
        io::Table t;
        t.add_column(si_units ? "width_angstrom" : "width", widths);
        for (int n = 1; n <= n_max; ++n) t.add_column("current_n" + std::to_string(n), per[static_cast<std::size_t>(n - 1)]);
        t.add_column("total", total);
        ctx.write_csv("currents.csv", t);

        json kappas = json::array();
        for (int n = 1; n <= n_max; ++n) kappas.push_back(kappa_mode(sc, n) * length_unit);
        json report{{"kappa", kappas}, {"kappa_unit", si_units ? "1/angstrom" : "1/length"}};
        json weights_out = json::array();
        for (const auto& [n, a] : weights.map()) weights_out.push_back(a);
        report["weights"] = weights_out;
        if (n_max >= 2) {
            const auto cross = crossover_width(mc, 1, 2, w_hi * length_unit);
            report["crossover_width_1_2"] = cross ? json(*cross / length_unit) : json(nullptr);
            report["wkb_crossover_width_1_2"] = wkb_crossover_width(sc, weights, 1, 2) / length_unit;
        }
        ctx.write_json("report.json", report);
        return JobResult{report};
    };
}

inline Job prepare_wigner(const json& p)
{
    using namespace detail;
    const SpatialGrid grid(num(p, "x_min"), num(p, "x_max"), count(p, "points"));
    const int n = static_cast<int>(whole(p, "mode"));
    const double x0 = num(p, "x0"), sigma = num(p, "sigma"), k0 = num(p, "k0");
    auto values = gaussian_packet(grid, x0, sigma, k0);
    if (str(p, "state") == "cat") {
        const double a = num(p, "separation");
        values = gaussian_packet(grid, x0 - a, sigma, k0);
        const auto other = gaussian_packet(grid, x0 + a, sigma, k0);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += other[i];
    }
    ModeWavefunction psi(grid, values, n, 1.0);
    psi.normalize();
    const auto steps = count(p, "steps");
    const EvolutionParams ep{1.0, num(p, "dt"), steps};
    if (steps > 0) ep.validate();

    return [=](RunContext& ctx) {
        const auto state = steps > 0 ? evolve_mode(psi, FreePotential{}, ep) : psi;
        const auto w = wigner_transform(state);
        if (w.boundary_warning) spdlog::warn("the state reaches the domain edges; the Wigner lag window wraps");
        ctx.write_csv("wigner.csv", io::wigner_table(w));
        io::Table xm;
        xm.add_column("x", grid.points());
        xm.add_column("marginal", marginal_position(w));
        xm.add_column("density", state.density());
        ctx.write_csv("position_marginal.csv", xm);
        io::Table km;
        km.add_column("K", w.k_values);
        km.add_column("marginal", marginal_momentum(w));
        ctx.write_csv("momentum_marginal.csv", km);
        json report{{"integral", w.integral()},
                    {"negativity_volume", negativity_volume(w)},
                    {"max_imag_residue", w.max_imag_residue},
                    {"boundary_warning", w.boundary_warning},
                    {"num_x", w.num_x()},
                    {"num_k", w.num_k()},
                    {"dk", w.dk()},
                    {"time", state.time}};
        ctx.write_json("report.json", report);
        return JobResult{report};
    };
}

inline Job prepare_analyze_fringes(const json& p)
{
    using namespace detail;
    const auto file = str(p, "profile");
    if (file.empty()) throw ValidationError("parameter 'profile' (a CSV with position,intensity columns) is required");
    FringeProfile profile;
    try {
        profile = io::profile_from_table(io::read_csv(file), file);
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
    AnalysisConfig cfg;
    cfg.resample_to = count(p, "resample_to");
    if (cfg.resample_to != 0 && (cfg.resample_to < 64 || !is_power_of_two(cfg.resample_to)))
        throw ValidationError("parameter 'resample_to' must be 0 or a power of two >= 64");
    cfg.window = str(p, "window") == "none" ? Window::None : Window::Hann;
    cfg.peaks.min_relative = num(p, "min_relative");
    cfg.peaks.min_separation_bins = count(p, "min_separation_bins");
    cfg.peaks.noise_floor_factor = num(p, "noise_floor_factor");
    cfg.peaks.min_bin = count(p, "min_bin");
    cfg.harmonics.ratio_tolerance = num(p, "ratio_tolerance");
    cfg.harmonics.max_order = static_cast<int>(whole(p, "max_order"));
    cfg.harmonics.min_members = count(p, "min_members");
    if (!(cfg.peaks.min_relative > 0.0 && cfg.peaks.min_relative < 1.0)) throw ValidationError("min_relative must lie in (0, 1)");
    if (!(cfg.harmonics.ratio_tolerance > 0.0 && cfg.harmonics.ratio_tolerance < 0.5))
        throw ValidationError("ratio_tolerance must lie in (0, 0.5)");
    if (cfg.harmonics.max_order < 2) throw ValidationError("max_order must be >= 2");

    return [=](RunContext& ctx) {
        const auto r = analyze_profile(profile, cfg);
        ctx.write_csv("spectrum.csv", io::spectrum_table(r.spectrum));
        ctx.write_csv("peaks.csv", io::peaks_table(r.peaks));
        auto report = io::to_json(r);
        ctx.write_json("harmonics.json", report);
        return JobResult{{{"peaks", r.peaks.size()}, {"sequences", report["sequences"]}}};
    };
}

inline Job prepare_family_flow(const json& p)
{
    using namespace detail;
    const SpatialGrid grid(num(p, "x_min"), num(p, "x_max"), count(p, "points"));
    const PhaseGrid phases(count(p, "phase_points"));
    const double p0 = num(p, "p0"), dt = num(p, "dt"), centre = num(p, "center"), width = num(p, "width");
    const auto steps = count(p, "steps");
    const int harmonic = static_cast<int>(whole(p, "harmonic"));
    const int max_mode = static_cast<int>(whole(p, "max_mode"));
    if (!(dt > 0.0) || steps < 1) throw ValidationError("need dt > 0 and steps >= 1");
    if (!(width > 0.0)) throw ValidationError("parameter 'width' must be > 0");
    if (max_mode < 0 || max_mode >= static_cast<int>(phases.size() / 2))
        throw ValidationError("parameter 'max_mode' must lie in [0, phase_points / 2)");
    const double eta = 1.0, mass = 1.0;
    std::vector<double> v(grid.size() * phases.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < phases.size(); ++j) {
            const double d = grid.x(i) - centre;
            const double amp = std::exp(-d * d / (2.0 * width * width)) * (1.0 + 0.5 * std::cos(harmonic * phases.phi(j) - 0.3));
            v[i * phases.size() + j] = amp * amp;
        }
    const FamilyDensity f0(grid, phases, std::move(v));

    return [=](RunContext& ctx) {
        std::vector<PrincipalFunctionField> s;
        for (std::size_t k = 0; k <= steps; ++k) s.push_back(principal_function_free(p0, mass, dt * static_cast<double>(k), grid));
        const auto f1 = advect_family(f0, s, eta, mass, dt);
        const double t = dt * static_cast<double>(steps);
        ctx.write_csv("family_initial.csv", io::family_table(f0));
        ctx.write_csv("family_final.csv", io::family_table(f1));

        const auto modes = family_modes(f1);
        io::Table power;
        power.add_column("x", grid.points());
        for (int n = 0; n <= max_mode; ++n) {
            std::vector<double> col(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) col[i] = std::norm(modes.at(n)[i]);
            power.add_column("power_n" + std::to_string(n), std::move(col));
        }
        ctx.write_csv("mode_power.csv", power);
        ctx.write_csv("characteristic.csv",
                      io::characteristic_table(integrate_characteristic(centre, p0, FreePotential{}, mass, t, dt)));

        const auto phi_marginal = marginal_phi(f1);
        double parseval = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double lhs = 0.0;
            for (const auto& [n, field] : modes) lhs += std::norm(field[i]);
            parseval = std::max(parseval, std::abs(lhs - phi_marginal[i] / (2.0 * std::numbers::pi)));
        }
        json report{{"time", t},
                    {"mass_initial", f0.total_mass()},
                    {"mass_final", f1.total_mass()},
                    {"relative_mass_change", std::abs(f1.total_mass() - f0.total_mass()) / f0.total_mass()},
                    {"parseval_max_error", parseval},
                    {"mode_phase_per_n", free_transport_phase(1, eta, p0, mass, t)}};
        ctx.write_json("report.json", report);
        return JobResult{report};
    };
}

inline json criterion_json(const acceptance::CriterionResult& c)
{
    return {{"id", c.id}, {"title", c.title}, {"checks_passed", c.checks_passed}, {"budget_seconds", c.budget_seconds},
            {"measured", c.measured}};
}

/// The acceptance suite. Timings stay out of the emitted report (they go to the
/// manifest) so the report is deterministic.
inline Job prepare_selftest(json* timings)
{
    return [timings](RunContext& ctx) {
        const auto suite = acceptance::run_suite([](const acceptance::CriterionResult& c) {
            spdlog::info("[{}] {:2} {} ({:.2f} s of {:.0f} s)", c.passed() ? "PASS" : "FAIL", c.id, c.title, c.seconds,
                         c.budget_seconds);
        });
        json criteria = json::array();
        for (const auto& c : suite.criteria) {
            criteria.push_back(criterion_json(c));
            if (timings) (*timings)[std::to_string(c.id)] = {{"seconds", c.seconds}, {"within_budget", c.within_budget()}};
        }
        json report{{"digest", suite.digest}, {"criteria", criteria}};
        ctx.write_json("acceptance.json", report);
        json summary = json::object();
        for (const auto& c : suite.criteria) summary[std::to_string(c.id)] = c.passed() ? "pass" : "fail";
        return JobResult{{{"all_passed", suite.all_passed()}, {"criteria", summary}}, suite.all_passed() ? 0 : 3};
    };
}

inline Job prepare(const ResolvedConfig& rc, json* timings)
{
    const auto& c = rc.config;
    const auto& p = c.at("parameters");
    const auto e = c.at("experiment").get<std::string>();
    try {
        if (e == "evolve") return prepare_evolve(p);
        if (e == "double-slit") return prepare_double_slit(p);
        if (e == "classical-limit") return prepare_classical_limit(p);
        if (e == "tunnel-fit") return prepare_tunnel_fit(p, c.at("seed").get<std::uint64_t>());
        if (e == "tunnel-predict") return prepare_tunnel_predict(p, c.at("units") == "si");
        if (e == "wigner") return prepare_wigner(p);
        if (e == "analyze-fringes") return prepare_analyze_fringes(p);
        if (e == "family-flow") return prepare_family_flow(p);
        if (e == "selftest") return prepare_selftest(timings);
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& err) {
        throw ValidationError(err.what());
    }
    throw ValidationError("unknown experiment '" + e + "'");
}

} // namespace modeflow::cli
