#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "config.hpp"
#include "experiments.hpp"
#include "generate.hpp"

using namespace modeflow;
using namespace modeflow::cli;

namespace {

ResolvedConfig from_text(const std::string& text, const Overrides& ov = {})
{
    return resolve(YAML::Load(text), ov, std::filesystem::temp_directory_path());
}

Overrides assign(std::string kv)
{
    Overrides ov;
    ov.assignments.push_back(std::move(kv));
    return ov;
}

} // namespace

TEST(Config, DefaultsAreFilledAndEchoed)
{
    const auto rc = from_text("experiment: double-slit\nparameters: {alpha: 2}\n");
    const auto& p = rc.config["parameters"];
    EXPECT_EQ(p["alpha"].get<double>(), 2.0);
    EXPECT_EQ(p["n_max"].get<int>(), 4);
    EXPECT_EQ(rc.config["units"], "dimensionless");
    EXPECT_EQ(rc.config["seed"], 0);
    EXPECT_EQ(rc.config["output_dir"], "out/double-slit");
}

TEST(Config, UnknownKeysRejected)
{
    EXPECT_THROW(from_text("experiment: double-slit\nparameters: {alphaa: 2}\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: double-slit\nextra: 1\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: nope\n"), ValidationError);
    EXPECT_THROW(from_text("parameters: {}\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: double-slit\n", assign("nope=3")), ValidationError);
}

TEST(Config, TypesChecked)
{
    EXPECT_THROW(from_text("experiment: double-slit\nparameters: {n_max: 2.5}\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: double-slit\nparameters: {alpha: [1]}\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: double-slit\nparameters: {pattern: fancy}\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: evolve\nparameters: {modes: 3}\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: double-slit\nseed: -1\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: double-slit\nparameters: {alpha: .nan}\n"), ValidationError);
    const auto ok = from_text("experiment: evolve\nparameters: {modes: [1, 4]}\n");
    EXPECT_EQ(ok.config["parameters"]["modes"], json::array({1, 4}));
}

TEST(Config, UnitSystemsDoNotMix)
{
    EXPECT_THROW(from_text("experiment: tunnel-predict\nunits: si\nparameters: {energy: 0.3}\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: tunnel-predict\nparameters: {energy_ev: 3}\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: evolve\nunits: si\n"), ValidationError);
    EXPECT_THROW(from_text("experiment: evolve\nunits: cgs\n"), ValidationError);
    const auto si = from_text("experiment: tunnel-predict\nunits: si\n");
    EXPECT_TRUE(si.config["parameters"].contains("energy_ev"));
    EXPECT_FALSE(si.config["parameters"].contains("energy"));
}

TEST(Config, OverridesApply)
{
    Overrides ov;
    ov.assignments = {"alpha=1.0", "n_max=6", "seed=9", "output_dir=elsewhere"};
    auto rc = from_text("experiment: double-slit\nseed: 3\n", ov);
    EXPECT_EQ(rc.config["parameters"]["n_max"], 6);
    EXPECT_EQ(rc.config["seed"], 9);
    EXPECT_EQ(rc.config["output_dir"], "elsewhere");
    ov.seed = 11;
    ov.output_dir = "cli";
    rc = from_text("experiment: double-slit\n", ov);
    EXPECT_EQ(rc.config["seed"], 11);
    EXPECT_EQ(rc.config["output_dir"], "cli");
    EXPECT_THROW(from_text("experiment: double-slit\n", assign("experiment=wigner")), ValidationError);
    EXPECT_THROW(from_text("experiment: double-slit\n", assign("=3")), ValidationError);
}

TEST(Config, ManifestEchoResolvesToTheSameConfig)
{
    Overrides ov;
    ov.assignments = {"alpha=0.37", "beta=1.2345678901234567e-10"};
    const auto first = from_text("experiment: double-slit\nseed: 18446744073709551615\n", ov);
    json manifest{{"manifest_version", 1}, {"config", first.config}, {"outputs", json::array()}};
    const auto again = resolve(YAML::Load(manifest.dump()), {}, ".");
    EXPECT_EQ(again.config, first.config);
    EXPECT_EQ(again.config.dump(), first.config.dump());
}

TEST(Config, MissingInputFileIsAValidationError)
{
    EXPECT_THROW(from_text("experiment: analyze-fringes\nparameters: {profile: does_not_exist.csv}\n"), ValidationError);
}

TEST(Experiments, PrepareRejectsBadPhysics)
{
    EXPECT_THROW(prepare(from_text("experiment: double-slit\nparameters: {d: -1}\n"), nullptr), ValidationError);
    EXPECT_THROW(prepare(from_text("experiment: evolve\nparameters: {points: 100}\n"), nullptr), ValidationError);
    EXPECT_THROW(prepare(from_text("experiment: evolve\nparameters: {modes: [0]}\n"), nullptr), ValidationError);
    EXPECT_THROW(prepare(from_text("experiment: tunnel-predict\nparameters: {energy: 2}\n"), nullptr), ValidationError);
    EXPECT_THROW(prepare(from_text("experiment: tunnel-predict\nparameters: {n_max: 3, weights: [1, 2]}\n"), nullptr),
                 ValidationError);
    EXPECT_THROW(prepare(from_text("experiment: analyze-fringes\n"), nullptr), ValidationError);
    EXPECT_THROW(prepare(from_text("experiment: classical-limit\nparameters: {theta_samples: 100}\n"), nullptr),
                 ValidationError);
}

TEST(Generators, FringesAreDeterministic)
{
    FringeGenParams g;
    g.samples = 4096;
    g.alpha = 1.0;
    g.n_max = 4;
    g.noise = 0.02;
    g.seed = 7;
    const auto a = io::to_csv(io::profile_table(generate_fringes(g)));
    EXPECT_EQ(io::sha256_hex(a), io::sha256_hex(io::to_csv(io::profile_table(generate_fringes(g)))));
    g.seed = 8;
    EXPECT_NE(a, io::to_csv(io::profile_table(generate_fringes(g))));
    g.source = "lines-z";
    EXPECT_THROW(generate_fringes(g), ValidationError);
}

TEST(Generators, NoiselessCurrentsMatchTheModel)
{
    CurrentGenParams g;
    g.preset = "plot-e";
    g.noise = 0.0;
    const auto s = generate_currents(g);
    // c1 e^{-k1 (gap + offset)} + c2 e^{-k2 (gap + offset)} with the Plot E constants
    for (std::size_t i = 0; i < s.gaps.size(); ++i) {
        const double dx = s.gaps[i] + 2.17;
        const double expected = 0.22e-4 * std::exp(-1.72 * dx) + 0.735e-3 * std::exp(-3.4 * dx);
        EXPECT_NEAR(s.currents[i], expected, 1e-15 * expected);
        EXPECT_EQ(s.currents[i], current_model(s.gaps[i], TunnelFit::plot_e()));
    }
}

TEST(Generators, SeedChangeKeepsTheFittedRatioWithinItsUncertainty)
{
    CurrentGenParams g;
    FitOptions opt;
    opt.offset = g.model().offset;
    auto ratio_and_error = [&](std::uint64_t seed) {
        g.seed = seed;
        const auto r = fit_double_exponential(generate_currents(g), opt);
        const double q = *r.kappa_ratio;
        const double rel = std::hypot(r.std_errors[1] / r.fit.kappa1, r.std_errors[3] / r.fit.kappa2);
        return std::pair{q, q * rel};
    };
    const auto [r1, e1] = ratio_and_error(1);
    EXPECT_NEAR(r1, 2.01, 0.01);
    for (std::uint64_t seed = 2; seed <= 11; ++seed) {
        const auto [r, e] = ratio_and_error(seed);
        EXPECT_LT(std::abs(r - r1), 3.0 * std::hypot(e, e1)) << "seed " << seed;
    }
}

TEST(Generators, InvalidParametersRejected)
{
    CurrentGenParams g;
    g.points = 1;
    EXPECT_THROW(generate_currents(g), ValidationError);
    g = {};
    g.preset = "plot-x";
    EXPECT_THROW(generate_currents(g), ValidationError);
    g = {};
    g.kappa2 = 1.0;
    EXPECT_THROW(generate_currents(g), ValidationError);
}
