#include <gtest/gtest.h>

#include <random>

#include "modeflow/io/csv.hpp"
#include "modeflow/io/digest.hpp"
#include "modeflow/io/report.hpp"

using namespace modeflow;

TEST(Digest, KnownVectors)
{
    EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Csv, NumbersRoundTripExactly)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    io::Table t;
    std::vector<double> a, b;
    for (int i = 0; i < 500; ++i) {
        a.push_back(u(rng));
        b.push_back(std::ldexp(u(rng), -900 + i * 3));
    }
    t.add_column("a", a);
    t.add_column("b", b);
    const auto back = io::parse_csv(io::to_csv(t));
    ASSERT_EQ(back.header, t.header);
    EXPECT_EQ(back.column("a"), a);
    EXPECT_EQ(back.column("b"), b);
}

TEST(Csv, CommentsAndErrors)
{
    const auto t = io::parse_csv("# synthetic\n\nx,y\n1,2\n3, 4\n");
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.column("y")[1], 4.0);
    EXPECT_THROW(io::parse_csv("x,y\n1\n"), DataError);
    EXPECT_THROW(io::parse_csv("x\nabc\n"), DataError);
    EXPECT_THROW(io::parse_csv("# only a comment\n"), DataError);
    EXPECT_THROW(t.column("z"), DataError);
    io::Table bad;
    bad.add_column("a", {1, 2});
    EXPECT_THROW(bad.add_column("b", {1}), ShapeError);
}

TEST(Report, WavefunctionRoundTrip)
{
    const SpatialGrid g(-5, 5, 64);
    ModeWavefunction psi(g, gaussian_packet(g, 0.3, 0.7, 1.1), 3, 1.0, 0.25);
    const auto desc = io::wavefunction_descriptor(psi, "w.csv");
    const auto back = io::wavefunction_from_table(io::parse_csv(io::to_csv(io::wavefunction_table(psi))), desc);
    EXPECT_EQ(back.values, psi.values);
    EXPECT_EQ(back.n, 3);
    EXPECT_EQ(back.time, 0.25);
    EXPECT_EQ(desc["file"], "w.csv");
}

TEST(Report, CurrentTableRoundTripAndValidation)
{
    const auto s = synthesize_currents(TunnelFit::plot_e(), uniform_gaps(0, 5, 12), 0.0, 1);
    const auto back = io::currents_from_table(io::parse_csv(io::to_csv(io::current_table(s))));
    EXPECT_EQ(back.gaps, s.gaps);
    EXPECT_EQ(back.currents, s.currents);
    EXPECT_THROW(io::currents_from_table(io::parse_csv("gap_angstrom,current_ampere\n1,1e-6\n0.5,1e-7\n")), DataError);
}

TEST(Report, FringeReportJson)
{
    const auto r = analyze_profile(tone_profile({{9, 1.0}, {18, 0.5}}, 1.0, 512, 3.0));
    const auto j = io::to_json(r);
    ASSERT_EQ(j["sequences"].size(), 1u);
    EXPECT_EQ(j["sequences"][0]["members"][1]["order"], 2);
    EXPECT_NEAR(j["sequences"][0]["members"][1]["ratio"].get<double>(), 2.0, 1e-9);
    EXPECT_NEAR(j["sequences"][0]["members"][1]["amplitude_to_fundamental"].get<double>(), 0.5, 1e-9);
}
