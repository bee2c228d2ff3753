#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "modeflow/double_slit.hpp"
#include "modeflow/verify/oracles.hpp"

using namespace modeflow;
constexpr double pi = std::numbers::pi;

namespace {

double brute_interference(double theta, double alpha, long n_terms)
{
    verify::NeumaierSum s;
    for (long n = 1; n <= n_terms; ++n) s.add(std::exp(-alpha * static_cast<double>(n - 1)) * 2.0 * std::cos(static_cast<double>(n) * theta));
    return s.value();
}

double brute_dirichlet(double theta, long n_terms)
{
    verify::NeumaierSum s;
    for (long n = 1; n <= n_terms; ++n) s.add(2.0 * std::cos(static_cast<double>(n) * theta));
    return s.value();
}

SlitConfig random_config(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SlitConfig c;
    c.d = 0.2 + 2.0 * u(rng);
    c.x_screen = 50.0 + 500.0 * u(rng);
    c.k = 1.0 + 50.0 * u(rng);
    c.beta = std::pow(10.0, -5.0 + 4.0 * u(rng));
    c.a0 = 0.5 + u(rng);
    return c;
}

} // namespace

TEST(SlitConfig, Validation)
{
    SlitConfig c;
    EXPECT_NO_THROW(c.validate());
    c.d = 0.0;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.alpha = -0.1;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.n_max = 0;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    EXPECT_NEAR(c.y_at_theta(c.theta(7.5)), 7.5, 1e-12);
}

TEST(Amplitude, OnAxisSymmetry)
{
    SlitConfig c;
    const double single = c.a0 * c.a0 * std::exp(-2.0 * c.beta * c.d * c.d) / std::hypot(c.x_screen, c.d);
    EXPECT_NEAR(std::norm(amplitude_two_sources(c, c.x_screen, 0.0)), 4.0 * single, 1e-14);
    EXPECT_THROW(amplitude_two_sources(c, 0.0, c.d), DomainError);
}

TEST(Amplitude, NarrowEnvelopeVanishesOffSlit)
{
    SlitConfig c;
    c.beta = 1e3;
    EXPECT_LT(std::abs(amplitude_two_sources(c, c.x_screen, 0.0)), 1e-200);
    EXPECT_GT(std::abs(amplitude_two_sources(c, c.x_screen, c.d)), 0.01);
}

TEST(Amplitude, ModulusSquaredMatchesExactGeometryIntensity)
{
    std::mt19937_64 rng(11);
    for (int cfg_i = 0; cfg_i < 10; ++cfg_i) {
        const auto c = random_config(rng);
        std::uniform_real_distribution<double> y(-5.0 / std::sqrt(c.beta), 5.0 / std::sqrt(c.beta));
        for (int i = 0; i < 100; ++i) {
            const double yy = y(rng);
            const double a = std::norm(amplitude_two_sources(c, c.x_screen, yy));
            const double b = intensity_exact_geometry(c, yy).total;
            const double scale = intensity_exact_geometry(c, yy).hump1 + intensity_exact_geometry(c, yy).hump2;
            EXPECT_LE(std::abs(a - b), 1e-12 * std::max(scale, 1e-300));
        }
    }
}

// The single-mode form differs from the exact geometry only through the interference
// denominator; the relative gap is O(d^2 y^2 / r^4).
TEST(SingleMode, CloseToExactGeometryInFarField)
{
    SlitConfig c;
    c.d = 1.0;
    c.x_screen = 1000.0;
    ASSERT_TRUE(c.far_field());
    for (double y : {0.0, 10.0, 100.0, 300.0}) {
        const auto a = intensity_single_mode(c, y);
        const auto b = intensity_exact_geometry(c, y);
        EXPECT_DOUBLE_EQ(a.hump1, b.hump1);
        EXPECT_LT(std::abs(a.interference - b.interference), 1e-5 * (std::abs(b.interference) + 1e-300));
    }
}

TEST(SingleMode, CentralMaximum)
{
    SlitConfig c;
    const auto r = intensity_single_mode(c, 0.0);
    EXPECT_NEAR(r.interference, 2.0 * c.a0 * c.a0 * std::exp(-2.0 * c.beta * c.d * c.d) / std::sqrt(c.x_screen * c.x_screen - c.d * c.d),
                1e-15);
    EXPECT_DOUBLE_EQ(r.total, r.hump1 + r.hump2 + r.interference);
}

TEST(SingleMode, NonnegativeAtRandomPoints)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10000; ++i) {
        const auto c = random_config(rng);
        std::uniform_real_distribution<double> y(-6.0 / std::sqrt(c.beta), 6.0 / std::sqrt(c.beta));
        EXPECT_GE(intensity_single_mode(c, y(rng)).total, 0.0);
    }
}

TEST(SingleMode, FringeMaximaQuantized)
{
    SlitConfig c;
    c.d = 1.0;
    c.k = 200.0;
    c.x_screen = 1000.0;
    c.beta = 1e-7;
    const double half = 100.0;
    const auto p = screen_pattern(c, PatternKind::SingleMode, 10000, half);
    const double dy = p.y[1] - p.y[0];
    const auto maxima = local_maxima(p);
    for (int l = 1; l <= 5; ++l) {
        for (int sign : {-1, 1}) {
            const double s = sign * l * pi / (c.k * c.d);
            const double y_expected = c.x_screen * s / std::sqrt(1.0 - s * s);
            double best = 1e300;
            for (auto i : maxima) best = std::min(best, std::abs(p.y[i] - y_expected));
            EXPECT_LE(best, dy) << "l=" << l * sign;
        }
    }
}

TEST(ModeSummed, SingleModeUsesSimplifiedDenominator)
{
    SlitConfig c;
    c.n_max = 1;
    for (double y : {-30.0, 0.0, 2.5, 40.0}) {
        const auto m = mode_summed_terms(c, y);
        const double r = std::hypot(c.x_screen, y);
        const double inter = 2.0 * c.a0 * c.a0 * std::exp(-2.0 * c.beta * (y * y + c.d * c.d)) * std::cos(c.theta(y)) / r;
        EXPECT_NEAR(m.interference, inter, 1e-12 * std::abs(inter) + 1e-300);
        EXPECT_NEAR(m.hump1, c.a0 * c.a0 * std::exp(-2.0 * c.beta * (y - c.d) * (y - c.d)) / r, 1e-16);
    }
}

TEST(ModeSummed, GeometricTailNegligible)
{
    SlitConfig c;
    c.alpha = 2.0;
    c.n_max = 50;
    SlitConfig big = c;
    big.n_max = 10000;
    for (double y : {-20.0, 0.0, 3.0, 17.0}) EXPECT_LT(std::abs(mode_summed_intensity(c, y) - mode_summed_intensity(big, y)), 1e-15);
}

TEST(ModeSummed, LongSeriesMatchesTermByTermSum)
{
    SlitConfig c;
    c.d = 1.0;
    c.k = 50.0;
    c.x_screen = 1000.0;
    c.beta = 1e-6;
    c.n_max = 3000;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> yd(-800.0, 800.0);
    for (double alpha : {0.0, 1e-4, 0.01, 0.7}) {
        c.alpha = alpha;
        for (int trial = 0; trial < 40; ++trial) {
            const double y = trial == 0 ? 0.0 : yd(rng);
            verify::NeumaierSum w, f;
            for (int n = 1; n <= c.n_max; ++n) {
                const double a = std::exp(-alpha * (n - 1));
                w.add(a);
                f.add(a * 2.0 * std::cos(n * c.theta(y)));
            }
            const auto got = mode_summed_terms(c, y);
            const double den = std::hypot(c.x_screen, y);
            const double env = std::exp(-2.0 * c.beta * (y * y + c.d * c.d)) / den;
            EXPECT_NEAR(got.interference / env, f.value(), 1e-9 * w.value()) << alpha << " " << y;
            EXPECT_NEAR(got.hump1 * den / std::exp(-2.0 * c.beta * (y - c.d) * (y - c.d)), w.value(), 1e-12 * w.value());
        }
    }
}

TEST(ClosedForm, MatchesBruteForceSums)
{
    for (double alpha : {0.1, 0.5, 1.0, 2.0, 5.0})
        for (double theta : {0.0, 0.1, 1.0, pi / 2.0, 2.0, 3.0, pi}) {
            const double exact = interference_closed_form(theta, alpha);
            const double brute = brute_interference(theta, alpha, 1000000);
            EXPECT_LT(std::abs(exact - brute), 1e-10 * std::abs(exact)) << theta << " " << alpha;
        }
}

TEST(ClosedForm, Limits)
{
    for (double th : {0.0, 0.7, 2.0}) EXPECT_NEAR(interference_closed_form(th, 60.0), 2.0 * std::cos(th), 1e-20 + 1e-14);
    for (double a : {0.3, 1.0, 4.0}) EXPECT_NEAR(interference_closed_form(0.0, a), 2.0 / (1.0 - std::exp(-a)), 1e-12);
    EXPECT_THROW(interference_closed_form(1.0, 0.0), DomainError);
    EXPECT_THROW(interference_closed_form(1.0, -1.0), DomainError);
}

TEST(Dirichlet, Examples)
{
    EXPECT_EQ(dirichlet_sum(0.0, 37), 74.0);
    EXPECT_NEAR(dirichlet_sum(pi, 10), 0.0, 1e-12);
    EXPECT_THROW(dirichlet_sum(1.0, 0), DomainError);
}

TEST(Dirichlet, MatchesDirectSummation)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> th(-pi, pi);
    for (long n : {1L, 2L, 7L, 100L, 1000L, 10000L}) {
        std::vector<double> thetas{pi, 1e-7, -3e-7, 1e-9, 0.5e-6};
        for (int i = 0; i < 40; ++i) thetas.push_back(th(rng));
        for (double t : thetas) EXPECT_LT(std::abs(dirichlet_sum(t, n) - brute_dirichlet(t, n)), 1e-9) << n << " " << t;
    }
}

// Every cosine integrates to zero over a full period, so the whole kernel does.
TEST(Dirichlet, ZeroIntegralOverPeriod)
{
    constexpr std::size_t m = 100000;
    for (long n : {1L, 10L, 100L}) {
        verify::NeumaierSum s;
        const double h = 2.0 * pi / static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) s.add(dirichlet_sum(-pi + h * (static_cast<double>(i) + 1.0), n) * h);
        EXPECT_LT(std::abs(s.value()), 1e-8) << n;
    }
}

TEST(Classical, SymmetryAndHumpCentres)
{
    SlitConfig c;
    c.d = 20.0;
    c.beta = 0.01;
    c.x_screen = 1e4;
    for (double y : {0.5, 3.0, 21.0, 40.0}) EXPECT_DOUBLE_EQ(classical_pattern(c, y), classical_pattern(c, -y));
    const auto p = screen_pattern(c, PatternKind::Classical, 8001, 40.0);
    const auto maxima = local_maxima(p);
    ASSERT_EQ(maxima.size(), 2u);
    EXPECT_NEAR(std::abs(p.y[maxima[0]]), c.d, 0.02);
    EXPECT_NEAR(std::abs(p.y[maxima[1]]), c.d, 0.02);
}

TEST(Classical, EqualWeightsRecoverTwoHumps)
{
    SlitConfig c;
    c.d = 1.0;
    c.k = 50.0;
    c.x_screen = 1000.0;
    c.beta = 1e-6;
    c.alpha = 0.0;
    c.n_max = 10000;
    for (double y : {-c.d, c.d}) {
        const double avg = theta_averaged_intensity(c, y, 10240);
        const double cls = classical_pattern(c, y);
        EXPECT_LT(std::abs(avg - cls), 0.01 * cls);
    }
}
