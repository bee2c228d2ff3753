#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "experiments.hpp"
#include "generate.hpp"
#include "run_context.hpp"

namespace {

using namespace modeflow::cli;

constexpr int exit_runtime = 1;
constexpr int exit_validation = 2;

void setup_logging()
{
    auto logger = spdlog::stderr_logger_st("modeflow");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    const char* env = std::getenv("MODEFLOW_LOG_LEVEL");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

int report_error(const std::string& kind, const std::string& message, int code, const json& detail = {})
{
    json e{{"kind", kind}, {"message", message}, {"exit_code", code}};
    if (!detail.is_null()) e["detail"] = detail;
    std::cerr << json{{"error", e}}.dump() << std::endl;
    return code;
}

int execute(const ResolvedConfig& rc, const std::string& config_source)
{
    const Stopwatch clock;
    json timings = json::object();
    const Job job = prepare(rc, &timings); // may throw ValidationError
    std::vector<std::pair<std::string, std::string>> inputs{{"config", config_source}};
    for (const auto& [name, path] : rc.input_files) inputs.emplace_back(name, path);
    const json input_digests = digest_inputs(inputs);

    RunContext ctx(rc.config.at("output_dir").get<std::string>());
    spdlog::info("running {} into {}", rc.config.at("experiment").get<std::string>(), ctx.dir().string());
    const JobResult r = job(ctx);
    write_manifest(ctx, rc.config, input_digests, clock.seconds(), timings.empty() ? json() : json{{"timings", timings}});
    std::cout << json{{"output_dir", ctx.dir().string()}, {"summary", r.summary}}.dump(2) << std::endl;
    return r.status;
}

} // namespace

int main(int argc, char** argv)
{
    setup_logging();
    CLI::App app{"modeflow: mode-indexed amplitude dynamics laboratory"};
    app.set_version_flag("--version", std::string(MODEFLOW_VERSION));
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    std::uint64_t seed = 0;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run an experiment from a config file or an emitted manifest");
    run->add_option("config", config_path, "YAML config (or manifest.json)")->required();
    run->add_option("--overrides", ov.assignments, "Parameter overrides key=value (value in YAML syntax)");
    auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides the config)");
    auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides the config)");

    auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
    std::string selftest_out = "out/selftest";
    selftest->add_option("--out", selftest_out, "Output directory");

    auto* gen = app.add_subcommand("gen", "Generate synthetic data files");
    gen->require_subcommand(1);
    FringeGenParams fg;
    std::string fringe_out = "data_out/fringes";
    auto* gf = gen->add_subcommand("fringes", "Fringe profile (position,intensity)");
    gf->add_option("--source", fg.source, "slit, lines-a or lines-b")->capture_default_str();
    gf->add_option("--d", fg.d)->capture_default_str();
    gf->add_option("--k", fg.k)->capture_default_str();
    gf->add_option("--x-screen", fg.x_screen)->capture_default_str();
    gf->add_option("--beta", fg.beta)->capture_default_str();
    gf->add_option("--alpha", fg.alpha)->capture_default_str();
    gf->add_option("--n-max", fg.n_max)->capture_default_str();
    gf->add_option("--samples", fg.samples)->capture_default_str();
    gf->add_option("--noise", fg.noise, "Gaussian noise sigma relative to the peak")->capture_default_str();
    gf->add_option("--seed", fg.seed)->capture_default_str();
    gf->add_option("--out", fringe_out, "Output directory")->capture_default_str();

    CurrentGenParams cg;
    std::string current_out = "data_out/tunnel_current";
    auto* gc = gen->add_subcommand("tunnel-current", "Current vs gap samples (gap_angstrom,current_ampere)");
    gc->add_option("--preset", cg.preset, "plot-d or plot-e")->capture_default_str();
    gc->add_option("--c1", cg.c1);
    gc->add_option("--c2", cg.c2);
    gc->add_option("--kappa1", cg.kappa1);
    gc->add_option("--kappa2", cg.kappa2);
    gc->add_option("--offset", cg.offset);
    gc->add_option("--points", cg.points)->capture_default_str();
    gc->add_option("--gap-min", cg.gap_min)->capture_default_str();
    gc->add_option("--gap-max", cg.gap_max)->capture_default_str();
    gc->add_option("--noise", cg.noise, "Log-normal noise sigma")->capture_default_str();
    gc->add_option("--seed", cg.seed)->capture_default_str();
    gc->add_option("--out", current_out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), exit_validation);
    }

    try {
        if (*run) {
            if (*seed_opt) ov.seed = seed;
            if (*out_opt) ov.output_dir = out_dir;
            const auto rc = load_config(config_path, ov);
            return execute(rc, config_path);
        }
        if (*selftest) {
            ResolvedConfig rc;
            rc.config = {{"experiment", "selftest"}, {"seed", 0}, {"units", "dimensionless"}, {"output_dir", selftest_out},
                         {"parameters", json::object()}};
            const Stopwatch clock;
            json timings = json::object();
            RunContext ctx(selftest_out);
            const auto r = prepare(rc, &timings)(ctx);
            write_manifest(ctx, rc.config, json::array(), clock.seconds(), {{"timings", timings}});
            std::cout << json{{"output_dir", ctx.dir().string()}, {"summary", r.summary}}.dump(2) << std::endl;
            return r.status;
        }
        const Stopwatch clock;
        if (*gf) {
            const auto profile = generate_fringes(fg);
            RunContext ctx(fringe_out);
            ctx.write_csv("fringes.csv", modeflow::io::profile_table(profile));
            json cfg{{"generator", "fringes"}, {"seed", fg.seed}, {"parameters", fg.to_json()}};
            write_manifest(ctx, cfg, json::array(), clock.seconds());
            std::cout << json{{"output_dir", ctx.dir().string()}, {"outputs", ctx.outputs()}}.dump(2) << std::endl;
            return 0;
        }
        if (*gc) {
            const auto samples = generate_currents(cg);
            RunContext ctx(current_out);
            ctx.write_csv("tunnel_current.csv", modeflow::io::current_table(samples));
            json cfg{{"generator", "tunnel-current"}, {"seed", cg.seed}, {"parameters", cg.to_json()}};
            write_manifest(ctx, cfg, json::array(), clock.seconds());
            std::cout << json{{"output_dir", ctx.dir().string()}, {"outputs", ctx.outputs()}}.dump(2) << std::endl;
            return 0;
        }
    } catch (const ValidationError& e) {
        return report_error("validation", e.what(), exit_validation);
    } catch (const modeflow::FitError& e) {
        return report_error("fit", e.what(), exit_runtime, {{"best_so_far", modeflow::io::to_json(e.best_so_far())}});
    } catch (const std::exception& e) {
        return report_error("runtime", e.what(), exit_runtime);
    }
    return exit_runtime;
}
