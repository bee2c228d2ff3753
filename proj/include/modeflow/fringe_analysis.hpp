#pragma once

// Fringe-profile spectra, peak picking and grouping of peaks into harmonic
// sequences f, 2f, 3f, ... with relative intensities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "modeflow/core/error.hpp"
#include "modeflow/core/fft.hpp"
#include "modeflow/core/grid.hpp"
#include "modeflow/double_slit.hpp"

namespace modeflow {

struct FringeProfile {
    std::vector<double> positions;
    std::vector<double> intensities;
    std::string source;

    void validate() const
    {
        if (positions.size() != intensities.size()) throw DataError("FringeProfile: positions and intensities differ in length");
        if (positions.size() < 64) throw DataError("FringeProfile: need at least 64 samples");
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (!std::isfinite(positions[i]) || !std::isfinite(intensities[i])) throw DataError("FringeProfile: non-finite sample");
            if (intensities[i] < 0.0) throw DataError("FringeProfile: intensities must be >= 0");
            if (i > 0 && !(positions[i] > positions[i - 1])) throw DataError("FringeProfile: positions must increase strictly");
        }
    }

    double spacing() const { return (positions.back() - positions.front()) / static_cast<double>(positions.size() - 1); }

    bool is_uniform() const
    {
        const double h = spacing();
        for (std::size_t i = 1; i < positions.size(); ++i)
            if (std::abs((positions[i] - positions[i - 1]) - h) > 1e-6 * h) return false;
        return true;
    }
};

/// Linear interpolation onto num uniform samples spanning the original range.
inline FringeProfile resample_uniform(const FringeProfile& p, std::size_t num)
{
    if (num < 64 || !is_power_of_two(num)) throw DomainError("resample_uniform: num must be a power of two >= 64");
    p.validate();
    FringeProfile out{std::vector<double>(num), std::vector<double>(num), p.source};
    const double x0 = p.positions.front(), x1 = p.positions.back();
    std::size_t seg = 0;
    for (std::size_t i = 0; i < num; ++i) {
        const double x = (i + 1 == num) ? x1 : x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(num - 1);
        while (seg + 2 < p.positions.size() && p.positions[seg + 1] < x) ++seg;
        const double xa = p.positions[seg], xb = p.positions[seg + 1];
        const double t = std::clamp((x - xa) / (xb - xa), 0.0, 1.0);
        out.positions[i] = x;
        out.intensities[i] = (1.0 - t) * p.intensities[seg] + t * p.intensities[seg + 1];
    }
    return out;
}

enum class Window { None, Hann };

struct Spectrum {
    std::vector<double> frequencies; // cycles per position unit, bins 0..N/2
    std::vector<double> amplitudes;  // sinusoid amplitude in intensity units (window gain removed)
    double bin_width = 0.0;
    Window window = Window::Hann;
};

/// Mean-removed, optionally Hann-windowed one-sided amplitude spectrum. A tone
/// A cos(2 pi f x) on a bin centre reads A.
inline Spectrum amplitude_spectrum(const FringeProfile& p, Window window = Window::Hann)
{
    p.validate();
    if (!p.is_uniform()) throw DataError("amplitude_spectrum: profile is not uniformly sampled; resample first");
    const std::size_t n = p.intensities.size();
    double mean = 0.0;
    for (double v : p.intensities) mean += v;
    mean /= static_cast<double>(n);
    CVector buf(n);
    double gain = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = window == Window::Hann
                             ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n))
                             : 1.0;
        gain += w;
        buf[i] = (p.intensities[i] - mean) * w;
    }
    gain /= static_cast<double>(n);
    fft_inplace(buf);
    Spectrum s;
    s.window = window;
    s.bin_width = 1.0 / (static_cast<double>(n) * p.spacing());
    for (std::size_t j = 0; j <= n / 2; ++j) {
        s.frequencies.push_back(static_cast<double>(j) * s.bin_width);
        const double edge = (j == 0 || j == n / 2) ? 1.0 : 2.0;
        s.amplitudes.push_back(edge * std::abs(buf[j]) / (static_cast<double>(n) * gain));
    }
    return s;
}

struct SpectrumPeak {
    double frequency = 0.0;
    double amplitude = 0.0;
    double relative_amplitude = 0.0;
    double bin = 0.0; // refined fractional bin
};

struct PeakOptions {
    double min_relative = 0.03;
    std::size_t min_separation_bins = 2;
    // Peaks must also exceed this multiple of the median bin amplitude. For
    // Rayleigh-distributed noise amplitudes the median is 1.177 sigma, so 4.25
    // puts the floor at 5 sigma.
    double noise_floor_factor = 4.25;
    // Lowest bin searched. A smooth envelope (the two humps) leaves a shoulder that
    // falls monotonically from DC and would otherwise peak right after the removed mean.
    std::size_t min_bin = 3;
};

inline double median_amplitude(const Spectrum& s)
{
    if (s.amplitudes.size() < 3) return 0.0;
    std::vector<double> a(s.amplitudes.begin() + 1, s.amplitudes.end());
    const auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
    std::nth_element(a.begin(), mid, a.end());
    return *mid;
}

/// Interior local maxima above both thresholds, refined by a 3-point parabola,
/// strongest first.
inline std::vector<SpectrumPeak> detect_peaks(const Spectrum& s, const PeakOptions& opt = {})
{
    if (!(opt.min_relative > 0.0 && opt.min_relative < 1.0)) throw DomainError("detect_peaks: min_relative must lie in (0, 1)");
    std::vector<SpectrumPeak> cand;
    const auto& a = s.amplitudes;
    if (a.size() < 3) return cand;
    for (std::size_t j = std::max<std::size_t>(opt.min_bin, 1); j + 1 < a.size(); ++j) {
        if (!(a[j] > a[j - 1] && a[j] >= a[j + 1])) continue;
        // parabola through log amplitudes (relative to the centre bin, so a common
        // scale cancels exactly); linear amplitudes when a neighbour is exactly zero
        const bool logs = a[j - 1] > 0.0 && a[j + 1] > 0.0;
        const double l = logs ? std::log(a[j - 1] / a[j]) : a[j - 1];
        const double c = logs ? 0.0 : a[j];
        const double r = logs ? std::log(a[j + 1] / a[j]) : a[j + 1];
        const double den = l - 2.0 * c + r;
        const double delta = den != 0.0 ? std::clamp(0.5 * (l - r) / den, -0.5, 0.5) : 0.0;
        const double top = c - 0.25 * (l - r) * delta;
        SpectrumPeak p;
        p.bin = static_cast<double>(j) + delta;
        p.frequency = p.bin * s.bin_width;
        p.amplitude = logs ? a[j] * std::exp(top) : top;
        cand.push_back(p);
    }
    if (cand.empty()) return cand;
    std::stable_sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.amplitude > y.amplitude; });
    const double dominant = cand.front().amplitude;
    const double floor = std::max(opt.min_relative * dominant, opt.noise_floor_factor * median_amplitude(s));
    std::vector<SpectrumPeak> out;
    for (const auto& p : cand) {
        if (p.amplitude < floor) break;
        const bool crowded = std::any_of(out.begin(), out.end(), [&](const auto& q) {
            return std::abs(q.bin - p.bin) < static_cast<double>(opt.min_separation_bins);
        });
        if (crowded) continue;
        out.push_back(p);
    }
    for (auto& p : out) p.relative_amplitude = p.amplitude / dominant;
    return out;
}

struct HarmonicMember {
    int order = 1;
    SpectrumPeak peak;
    double ratio = 1.0; // f / f_fundamental
};

struct HarmonicReport {
    SpectrumPeak fundamental;
    std::vector<HarmonicMember> members; // order 1 first, ascending order
};

struct HarmonicAnalysis {
    std::vector<HarmonicReport> sequences;
    std::vector<SpectrumPeak> unassigned;
};

struct HarmonicOptions {
    double ratio_tolerance = 0.15; // |f / (k f1) - 1|
    int max_order = 8;
    std::size_t min_members = 2;
};

/// Greedy grouping: the strongest unassigned peak is tried as a fundamental; each
/// order k = 2..max_order takes the strongest unassigned peak whose ratio lies within
/// tolerance of k. Groups with fewer than min_members peaks are dissolved and the
/// candidate fundamental is set aside.
inline HarmonicAnalysis harmonic_sequences(std::vector<SpectrumPeak> peaks, const HarmonicOptions& opt = {})
{
    if (!(opt.ratio_tolerance > 0.0 && opt.ratio_tolerance < 0.5)) throw DomainError("harmonic_sequences: tolerance must lie in (0, 0.5)");
    std::stable_sort(peaks.begin(), peaks.end(), [](const auto& x, const auto& y) { return x.amplitude > y.amplitude; });
    std::vector<bool> used(peaks.size(), false);
    HarmonicAnalysis out;
    for (std::size_t f = 0; f < peaks.size(); ++f) {
        if (used[f]) continue;
        used[f] = true;
        const double f1 = peaks[f].frequency;
        HarmonicReport rep{peaks[f], {{1, peaks[f], 1.0}}};
        std::vector<std::size_t> taken;
        if (f1 > 0.0) {
            for (int k = 2; k <= opt.max_order; ++k) {
                for (std::size_t j = 0; j < peaks.size(); ++j) {
                    if (used[j]) continue;
                    const double ratio = peaks[j].frequency / f1;
                    if (std::lround(ratio) != k || std::abs(ratio / k - 1.0) > opt.ratio_tolerance) continue;
                    used[j] = true; // peaks are sorted, so j is the strongest match
                    taken.push_back(j);
                    rep.members.push_back({k, peaks[j], ratio});
                    break;
                }
            }
        }
        if (rep.members.size() >= opt.min_members) {
            out.sequences.push_back(std::move(rep));
        } else {
            for (auto j : taken) used[j] = false;
            out.unassigned.push_back(peaks[f]);
        }
    }
    // whatever a dissolved group released and nobody claimed later
    for (std::size_t j = 0; j < peaks.size(); ++j)
        if (!used[j]) out.unassigned.push_back(peaks[j]);
    std::stable_sort(out.unassigned.begin(), out.unassigned.end(), [](const auto& x, const auto& y) { return x.amplitude > y.amplitude; });
    return out;
}

struct AnalysisConfig {
    std::size_t resample_to = 0; // 0: keep uniform power-of-two input, else next power of two
    Window window = Window::Hann;
    PeakOptions peaks;
    HarmonicOptions harmonics;
};

struct FringeReport {
    Spectrum spectrum;
    std::vector<SpectrumPeak> peaks;
    HarmonicAnalysis harmonics;
    std::size_t samples_used = 0;
};

inline std::size_t next_power_of_two(std::size_t n)
{
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline FringeReport analyze_profile(const FringeProfile& profile, const AnalysisConfig& cfg = {})
{
    profile.validate();
    FringeProfile work = profile;
    if (cfg.resample_to != 0)
        work = resample_uniform(profile, cfg.resample_to);
    else if (!profile.is_uniform() || !is_power_of_two(profile.positions.size()))
        work = resample_uniform(profile, std::max<std::size_t>(64, next_power_of_two(profile.positions.size())));
    FringeReport r;
    r.samples_used = work.positions.size();
    r.spectrum = amplitude_spectrum(work, cfg.window);
    r.peaks = detect_peaks(r.spectrum, cfg.peaks);
    r.harmonics = harmonic_sequences(r.peaks, cfg.harmonics);
    return r;
}

/// n uniform samples of sum_i a_i cos(2 pi f_i x + phase_i) + offset on [0, length).
struct Tone {
    double frequency;
    double amplitude;
    double phase = 0.0;
};

inline FringeProfile tone_profile(const std::vector<Tone>& tones, double length, std::size_t n, double offset)
{
    FringeProfile p{std::vector<double>(n), std::vector<double>(n), "synthetic tones"};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = length * static_cast<double>(i) / static_cast<double>(n);
        double v = offset;
        for (const auto& t : tones) v += t.amplitude * std::cos(2.0 * std::numbers::pi * t.frequency * x + t.phase);
        p.positions[i] = x;
        p.intensities[i] = v;
    }
    return p;
}

/// Screen pattern as a profile over y (total intensity).
inline FringeProfile pattern_profile(const ScreenPattern& p, std::string source)
{
    FringeProfile out{p.y, {}, std::move(source)};
    out.intensities.reserve(p.terms.size());
    for (const auto& t : p.terms) out.intensities.push_back(std::max(t.total, 0.0));
    return out;
}

} // namespace modeflow
