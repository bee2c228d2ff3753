#pragma once

// Seeded injection-recovery and noise-only studies for the harmonic analyzer.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "modeflow/fringe_analysis.hpp"

namespace modeflow::verify {

struct InjectionCase {
    double fundamental = 0.0;
    std::vector<double> amplitudes; // index k-1 holds order k
    double noise_sigma = 0.0;
};

struct InjectionOutcome {
    int cases = 0;
    int recovered = 0;
    std::vector<int> failed_cases;
};

struct NoiseOutcome {
    int cases = 0;
    int with_sequences = 0;
    int peaks = 0;
};

/// Rms of the Hann one-sided amplitude spectrum of white noise with unit variance
/// per sample: 4 sqrt(3N/8) / N = sqrt(6/N).
inline double hann_noise_rms(std::size_t n) { return std::sqrt(6.0 / static_cast<double>(n)); }

/// Fundamental in [10, 60) bins, 2 to 4 consecutive orders, weakest relative
/// amplitude in [0.05, 0.8], and white noise set so the weakest line sits at
/// `snr` times the noise rms of the spectrum.
inline InjectionCase draw_case(std::mt19937_64& rng, double snr, std::size_t n)
{
    std::uniform_real_distribution<double> f(10.0, 60.0), a(0.05, 0.8);
    std::uniform_int_distribution<int> m(2, 4);
    InjectionCase c;
    c.fundamental = f(rng);
    const int orders = m(rng);
    c.amplitudes.push_back(1.0);
    double weakest = 1.0;
    for (int k = 2; k <= orders; ++k) {
        c.amplitudes.push_back(a(rng));
        weakest = std::min(weakest, c.amplitudes.back());
    }
    c.noise_sigma = weakest / (snr * hann_noise_rms(n));
    return c;
}

inline FringeProfile render_case(const InjectionCase& c, std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<Tone> tones;
    for (std::size_t k = 0; k < c.amplitudes.size(); ++k)
        tones.push_back({c.fundamental * static_cast<double>(k + 1), c.amplitudes[k], phase(rng)});
    // offset keeps intensities nonnegative for any draw
    auto p = tone_profile(tones, 1.0, n, 4.0 + 12.0 * c.noise_sigma);
    std::normal_distribution<double> z(0.0, c.noise_sigma);
    for (double& v : p.intensities) v = std::max(0.0, v + z(rng));
    p.source = "synthetic injection";
    return p;
}

/// A case counts as recovered when one reported sequence has the injected
/// fundamental (within half a bin) and exactly the injected orders.
inline bool recovered(const InjectionCase& c, const FringeReport& r)
{
    for (const auto& s : r.harmonics.sequences) {
        if (std::abs(s.fundamental.frequency - c.fundamental) > 0.5) continue;
        if (s.members.size() != c.amplitudes.size()) return false;
        for (std::size_t i = 0; i < s.members.size(); ++i)
            if (s.members[i].order != static_cast<int>(i + 1)) return false;
        return true;
    }
    return false;
}

inline InjectionOutcome injection_suite(std::uint64_t seed, int cases, double snr = 10.0, std::size_t n = 1024)
{
    InjectionOutcome out;
    for (int i = 0; i < cases; ++i) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
        const auto c = draw_case(rng, snr, n);
        const auto report = analyze_profile(render_case(c, n, rng));
        ++out.cases;
        if (recovered(c, report))
            ++out.recovered;
        else
            out.failed_cases.push_back(i);
    }
    return out;
}

inline NoiseOutcome noise_study(std::uint64_t seed, int cases, std::size_t n = 1024)
{
    NoiseOutcome out;
    for (int i = 0; i < cases; ++i) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
        std::normal_distribution<double> z;
        auto p = tone_profile({}, 1.0, n, 12.0);
        for (double& v : p.intensities) v = std::max(0.0, v + z(rng));
        const auto r = analyze_profile(p);
        ++out.cases;
        out.peaks += static_cast<int>(r.peaks.size());
        if (!r.harmonics.sequences.empty()) ++out.with_sequences;
    }
    return out;
}

} // namespace modeflow::verify
