#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "modeflow/core/fft.hpp"
#include "modeflow/core/grid.hpp"

using namespace modeflow;

TEST(SpatialGrid, SpacingAndPoints)
{
    const SpatialGrid g(-1.0, 1.0, 8);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
    EXPECT_DOUBLE_EQ(g.x(0), -1.0);
    EXPECT_DOUBLE_EQ(g.x(7), 0.75);
    EXPECT_DOUBLE_EQ(g.wavenumber(1), 2.0 * std::numbers::pi / 2.0);
    EXPECT_DOUBLE_EQ(g.wavenumber(4), -2.0 * std::numbers::pi * 4.0 / 2.0);
}

TEST(SpatialGrid, RejectsBadSizes)
{
    EXPECT_THROW(SpatialGrid(0.0, 1.0, 4), DomainError);
    EXPECT_THROW(SpatialGrid(0.0, 1.0, 12), DomainError);
    EXPECT_THROW(SpatialGrid(1.0, 1.0, 16), DomainError);
    EXPECT_THROW(PhaseGrid(6), DomainError);
}

TEST(PhaseGrid, CoversCircle)
{
    const PhaseGrid p(16);
    EXPECT_DOUBLE_EQ(p.phi(0), 0.0);
    EXPECT_NEAR(p.phi(15) + p.spacing(), 2.0 * std::numbers::pi, 1e-15);
}

TEST(Fft, MatchesDirectDft)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    CVector x(16);
    for (auto& v : x) v = {nd(rng), nd(rng)};
    const CVector y = fft(x);
    for (std::size_t k = 0; k < x.size(); ++k) {
        cplx ref{};
        for (std::size_t j = 0; j < x.size(); ++j)
            ref += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(j * k) / double(x.size()));
        EXPECT_LT(std::abs(ref - y[k]), 1e-12);
    }
    const CVector back = ifft(y);
    for (std::size_t j = 0; j < x.size(); ++j) EXPECT_LT(std::abs(back[j] - x[j]), 1e-14);
}

TEST(Fft, InPlaceEqualsOutOfPlace)
{
    CVector x(64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = {std::sin(0.3 * double(i)), std::cos(0.7 * double(i))};
    const CVector y = fft(x);
    fft_inplace(x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], y[i]);
}
