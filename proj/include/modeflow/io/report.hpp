#pragma once

// Tables and JSON reports for the library's result types. Column names are
// part of the file contract and documented in the README.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modeflow/barrier_tunneling.hpp"
#include "modeflow/double_slit.hpp"
#include "modeflow/family_flow.hpp"
#include "modeflow/fringe_analysis.hpp"
#include "modeflow/io/csv.hpp"
#include "modeflow/mode_dynamics.hpp"
#include "modeflow/wigner.hpp"

namespace modeflow::io {

using nlohmann::json;

inline Table wavefunction_table(const ModeWavefunction& psi)
{
    const std::size_t n = psi.grid.size();
    std::vector<double> x(n), re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = psi.grid.x(i);
        re[i] = psi.values[i].real();
        im[i] = psi.values[i].imag();
    }
    Table t;
    t.add_column("x", std::move(x));
    t.add_column("re", std::move(re));
    t.add_column("im", std::move(im));
    t.add_column("density", psi.density());
    return t;
}

/// Descriptor pointing at a wavefunction CSV.
inline json wavefunction_descriptor(const ModeWavefunction& psi, const std::string& file)
{
    return {{"grid", {{"x_min", psi.grid.x_min()}, {"x_max", psi.grid.x_max()}, {"num_points", psi.grid.size()}}},
            {"n", psi.n},
            {"eta", psi.eta},
            {"t", psi.time},
            {"file", file}};
}

inline ModeWavefunction wavefunction_from_table(const Table& t, const json& descriptor)
{
    const auto& g = descriptor.at("grid");
    const SpatialGrid grid(g.at("x_min").get<double>(), g.at("x_max").get<double>(), g.at("num_points").get<std::size_t>());
    const auto& re = t.column("re");
    const auto& im = t.column("im");
    if (re.size() != grid.size()) throw ShapeError("wavefunction table length differs from its descriptor grid");
    CVector v(re.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = {re[i], im[i]};
    return {grid, std::move(v), descriptor.at("n").get<int>(), descriptor.at("eta").get<double>(), descriptor.at("t").get<double>()};
}

inline Table characteristic_table(const Characteristic& c)
{
    Table t;
    t.add_column("t", c.times);
    t.add_column("x", c.positions);
    t.add_column("p", c.momenta);
    t.add_column("action", c.actions);
    return t;
}

/// Long format, one row per (x, phi) cell.
inline Table family_table(const FamilyDensity& f)
{
    std::vector<double> x, phi, v;
    for (std::size_t i = 0; i < f.grid.size(); ++i)
        for (std::size_t j = 0; j < f.phase_grid.size(); ++j) {
            x.push_back(f.grid.x(i));
            phi.push_back(f.phase_grid.phi(j));
            v.push_back(f.at(i, j));
        }
    Table t;
    t.add_column("x", std::move(x));
    t.add_column("phi", std::move(phi));
    t.add_column("f", std::move(v));
    return t;
}

inline Table screen_table(const ScreenPattern& p)
{
    std::vector<double> total, h1, h2, inter;
    for (const auto& s : p.terms) {
        total.push_back(s.total);
        h1.push_back(s.hump1);
        h2.push_back(s.hump2);
        inter.push_back(s.interference);
    }
    Table t;
    t.add_column("y", p.y);
    t.add_column("total", std::move(total));
    t.add_column("hump1", std::move(h1));
    t.add_column("hump2", std::move(h2));
    t.add_column("interference", std::move(inter));
    return t;
}

inline Table profile_table(const FringeProfile& p)
{
    Table t;
    t.add_column("position", p.positions);
    t.add_column("intensity", p.intensities);
    return t;
}

inline FringeProfile profile_from_table(const Table& t, std::string source)
{
    FringeProfile p{t.column("position"), t.column("intensity"), std::move(source)};
    p.validate();
    return p;
}

inline Table spectrum_table(const Spectrum& s)
{
    Table t;
    t.add_column("frequency", s.frequencies);
    t.add_column("amplitude", s.amplitudes);
    return t;
}

inline Table peaks_table(const std::vector<SpectrumPeak>& peaks)
{
    std::vector<double> f, a, r, b;
    for (const auto& p : peaks) {
        f.push_back(p.frequency);
        a.push_back(p.amplitude);
        r.push_back(p.relative_amplitude);
        b.push_back(p.bin);
    }
    Table t;
    t.add_column("frequency", std::move(f));
    t.add_column("amplitude", std::move(a));
    t.add_column("relative_amplitude", std::move(r));
    t.add_column("bin", std::move(b));
    return t;
}

/// Long format, one row per (x, K) cell.
inline Table wigner_table(const WignerField& w)
{
    std::vector<double> x, k, v;
    for (std::size_t i = 0; i < w.num_x(); ++i)
        for (std::size_t j = 0; j < w.num_k(); ++j) {
            x.push_back(w.x_grid.x(i));
            k.push_back(w.k_values[j]);
            v.push_back(w.at(i, j));
        }
    Table t;
    t.add_column("x", std::move(x));
    t.add_column("K", std::move(k));
    t.add_column("W", std::move(v));
    return t;
}

inline Table current_table(const CurrentSamples& s)
{
    Table t;
    t.add_column("gap_angstrom", s.gaps);
    t.add_column("current_ampere", s.currents);
    return t;
}

inline CurrentSamples currents_from_table(const Table& t)
{
    CurrentSamples s{t.column("gap_angstrom"), t.column("current_ampere")};
    s.validate();
    return s;
}

inline json to_json(const SpectrumPeak& p)
{
    return {{"frequency", p.frequency}, {"amplitude", p.amplitude}, {"relative_amplitude", p.relative_amplitude}, {"bin", p.bin}};
}

inline json to_json(const FringeReport& r)
{
    json seqs = json::array();
    for (const auto& s : r.harmonics.sequences) {
        json members = json::array();
        for (const auto& m : s.members)
            members.push_back({{"order", m.order},
                               {"frequency", m.peak.frequency},
                               {"ratio", m.ratio},
                               {"amplitude", m.peak.amplitude},
                               {"relative_amplitude", m.peak.relative_amplitude},
                               {"amplitude_to_fundamental", m.peak.amplitude / s.fundamental.amplitude}});
        seqs.push_back({{"fundamental", s.fundamental.frequency}, {"members", members}});
    }
    json peaks = json::array(), unassigned = json::array();
    for (const auto& p : r.peaks) peaks.push_back(to_json(p));
    for (const auto& p : r.harmonics.unassigned) unassigned.push_back(to_json(p));
    return {{"samples_used", r.samples_used},
            {"bin_width", r.spectrum.bin_width},
            {"window", r.spectrum.window == Window::Hann ? "hann" : "none"},
            {"peaks", peaks},
            {"sequences", seqs},
            {"unassigned", unassigned}};
}

inline json to_json(const TunnelFit& f)
{
    return {{"c1", f.c1}, {"c2", f.c2}, {"kappa1", f.kappa1}, {"kappa2", f.kappa2}, {"offset", f.offset}};
}

inline json to_json(const FitResult& r)
{
    json j = to_json(r.fit);
    j["kappa_ratio"] = r.kappa_ratio ? json(*r.kappa_ratio) : json(nullptr);
    j["single_exponential"] = r.single_exponential;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["residual_norm"] = r.residual_norm;
    j["std_errors"] = {{"ln_c1", r.std_errors[0]}, {"kappa1", r.std_errors[1]}, {"ln_c2", r.std_errors[2]}, {"kappa2", r.std_errors[3]}};
    return j;
}

} // namespace modeflow::io
