#pragma once

// Run configuration: YAML file -> schema-checked, fully resolved JSON.
//
//   experiment: double-slit        # required
//   seed: 7                        # optional, default 0
//   units: dimensionless           # or si; default dimensionless
//   output_dir: out/double_slit    # optional, default out/<experiment>
//   parameters:                    # per-experiment keys, see schema()
//     alpha: 1.0
//
// Every key is checked against the experiment schema; unknown keys, type
// mismatches and keys that belong to the other unit system are rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

namespace modeflow::cli {

using nlohmann::json;

/// Bad configuration or parameters (exit status 2).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ParamType { Integer, Real, String, Boolean, RealArray, IntegerArray };
enum class UnitSystem { Any, Dimensionless, Si };

inline std::string unit_name(UnitSystem u)
{
    return u == UnitSystem::Si ? "si" : u == UnitSystem::Dimensionless ? "dimensionless" : "any";
}

struct ParamSpec {
    std::string name;
    ParamType type;
    json default_value; // null: derived from other parameters at run time
    UnitSystem system = UnitSystem::Any;
    std::vector<std::string> choices = {}; // String only
    bool is_path = false;                  // input file, digested into the manifest
};

struct ExperimentSchema {
    std::string name;
    std::vector<UnitSystem> systems; // allowed unit systems
    std::vector<ParamSpec> params;
};

namespace detail {

inline ParamSpec real(std::string n, double v, UnitSystem u = UnitSystem::Any) { return {std::move(n), ParamType::Real, v, u}; }
inline ParamSpec integer(std::string n, std::int64_t v, UnitSystem u = UnitSystem::Any)
{
    return {std::move(n), ParamType::Integer, v, u};
}
inline ParamSpec text(std::string n, std::string v, std::vector<std::string> choices = {})
{
    return {std::move(n), ParamType::String, std::move(v), UnitSystem::Any, std::move(choices)};
}
inline ParamSpec path(std::string n, std::string v = "")
{
    ParamSpec p{std::move(n), ParamType::String, std::move(v)};
    p.is_path = true;
    return p;
}

inline std::vector<ParamSpec> slit_params(double alpha, std::int64_t n_max)
{
    return {real("d", 1.0),       real("k", 1e4),           real("x_screen", 1e7), real("beta", 1e-10),
            real("a0", 1.0),      real("alpha", alpha),     integer("n_max", n_max), integer("samples", 8192),
            real("half_width", 0.0)};
}

} // namespace detail

inline const std::vector<ExperimentSchema>& schemas()
{
    using namespace detail;
    using U = UnitSystem;
    static const std::vector<ExperimentSchema> all = [] {
        std::vector<ExperimentSchema> s;
        s.push_back({"evolve",
                     {U::Dimensionless},
                     {real("x_min", -40.0), real("x_max", 40.0), integer("points", 1024), real("x0", -10.0), real("sigma", 1.0),
                      real("p0", 2.0), {"modes", ParamType::IntegerArray, json::array({1, 2, 3})}, real("alpha", 1.0),
                      text("potential", "barrier", {"free", "barrier", "harmonic"}), real("barrier_height", 2.5),
                      real("barrier_left", 0.0), real("barrier_width", 0.5), real("stiffness", 0.05), real("dt", 1e-3),
                      integer("steps", 5000)}});
        auto ds = slit_params(1.0, 4);
        ds.push_back(text("pattern", "mode-summed", {"mode-summed", "single-mode", "exact", "classical"}));
        s.push_back({"double-slit", {U::Dimensionless}, ds});
        auto cl = slit_params(0.0, 10000);
        cl[1] = real("k", 50.0);
        cl[2] = real("x_screen", 1000.0);
        cl[3] = real("beta", 1e-6);
        cl[7] = integer("samples", 201);
        cl[8] = real("half_width", 2000.0);
        cl.push_back(integer("theta_samples", 10240));
        s.push_back({"classical-limit", {U::Dimensionless}, cl});
        s.push_back({"tunnel-fit",
                     {U::Si},
                     {path("data"), text("preset", "plot-d", {"plot-d", "plot-e"}), integer("points", 20), real("gap_min", 0.0),
                      real("gap_max", 7.6), real("noise_sigma", 0.02), {"offset", ParamType::Real, json()},
                      real("split_current", 1e-6), integer("max_iterations", 200)}});
        s.push_back({"tunnel-predict",
                     {U::Si, U::Dimensionless},
                     {real("mass_me", 1.0, U::Si), real("energy_ev", 4.0, U::Si), real("height_ev", 8.0, U::Si),
                      real("eta_js", 1.0545718e-34, U::Si), real("width_min_angstrom", 0.5, U::Si),
                      real("width_max_angstrom", 10.0, U::Si), real("energy", 0.5, U::Dimensionless),
                      real("height", 1.0, U::Dimensionless), real("width_min", 0.1, U::Dimensionless),
                      real("width_max", 10.0, U::Dimensionless), integer("n_max", 2), real("alpha", 0.0),
                      {"weights", ParamType::RealArray, json::array()}, real("attempt_rate", 1.0), integer("points", 200)}});
        s.push_back({"wigner",
                     {U::Dimensionless},
                     {real("x_min", -32.0), real("x_max", 32.0), integer("points", 256), text("state", "cat", {"gaussian", "cat"}),
                      real("x0", 0.0), real("sigma", 1.0), real("k0", 0.0), real("separation", 4.0), integer("mode", 1),
                      real("dt", 1e-3), integer("steps", 0)}});
        s.push_back({"analyze-fringes",
                     {U::Dimensionless},
                     {path("profile"), integer("resample_to", 0), text("window", "hann", {"hann", "none"}),
                      real("min_relative", 0.03), integer("min_separation_bins", 2), real("noise_floor_factor", 4.25),
                      integer("min_bin", 3), real("ratio_tolerance", 0.15), integer("max_order", 8), integer("min_members", 2)}});
        s.push_back({"family-flow",
                     {U::Dimensionless},
                     {real("x_min", 0.0), real("x_max", 32.0), integer("points", 256), integer("phase_points", 64),
                      real("p0", 1.0), real("dt", 0.1), integer("steps", 10), real("center", 8.0), real("width", 1.5),
                      integer("harmonic", 1), integer("max_mode", 4)}});
        s.push_back({"selftest", {U::Dimensionless, U::Si}, {}});
        return s;
    }();
    return all;
}

inline const ExperimentSchema& schema(const std::string& experiment)
{
    for (const auto& s : schemas())
        if (s.name == experiment) return s;
    std::string known;
    for (const auto& s : schemas()) known += (known.empty() ? "" : ", ") + s.name;
    throw ValidationError("unknown experiment '" + experiment + "' (expected one of: " + known + ")");
}

namespace detail {

inline json scalar_as(const YAML::Node& node, ParamType t, const std::string& key)
{
    auto fail = [&](const char* what) -> json {
        throw ValidationError("parameter '" + key + "' must be " + what);
    };
    if (!node.IsScalar()) return fail("a scalar");
    try {
        switch (t) {
        case ParamType::Integer: return node.as<std::int64_t>();
        case ParamType::Real: return node.as<double>();
        case ParamType::Boolean: return node.as<bool>();
        case ParamType::String: return node.as<std::string>();
        default: break;
        }
    } catch (const YAML::Exception&) {
    }
    switch (t) {
    case ParamType::Integer: return fail("an integer");
    case ParamType::Real: return fail("a real number");
    case ParamType::Boolean: return fail("a boolean");
    default: return fail("a string");
    }
}

inline json convert(const YAML::Node& node, const ParamSpec& spec)
{
    if (node.IsNull() && spec.default_value.is_null()) return nullptr;
    if (spec.type == ParamType::RealArray || spec.type == ParamType::IntegerArray) {
        if (!node.IsSequence()) throw ValidationError("parameter '" + spec.name + "' must be an array");
        json arr = json::array();
        for (const auto& item : node)
            arr.push_back(scalar_as(item, spec.type == ParamType::RealArray ? ParamType::Real : ParamType::Integer, spec.name));
        return arr;
    }
    json v = scalar_as(node, spec.type, spec.name);
    if (spec.type == ParamType::Real && !std::isfinite(v.get<double>()))
        throw ValidationError("parameter '" + spec.name + "' must be finite");
    if (!spec.choices.empty() && std::find(spec.choices.begin(), spec.choices.end(), v.get<std::string>()) == spec.choices.end()) {
        std::string opts;
        for (const auto& c : spec.choices) opts += (opts.empty() ? "" : ", ") + c;
        throw ValidationError("parameter '" + spec.name + "' must be one of: " + opts);
    }
    return v;
}

} // namespace detail

struct ResolvedConfig {
    json config;                                    // experiment, seed, units, output_dir, parameters
    std::map<std::string, std::string> input_files; // parameter name -> absolute path
    std::string source;                             // config or manifest file read
};

struct Overrides {
    std::vector<std::string> assignments; // k=v, v in YAML syntax
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

/// Builds the resolved configuration from a parsed YAML document. `base_dir` anchors
/// relative input paths.
inline ResolvedConfig resolve(YAML::Node root, const Overrides& ov, const std::filesystem::path& base_dir)
{
    if (!root.IsMap()) throw ValidationError("config must be a mapping at the top level");
    // a manifest re-run: take its config echo verbatim
    if (root["manifest_version"] && root["config"]) root = root["config"];

    static const std::vector<std::string> top_keys{"experiment", "seed", "units", "output_dir", "parameters"};
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (std::find(top_keys.begin(), top_keys.end(), key) == top_keys.end())
            throw ValidationError("unknown top-level key '" + key + "'");
    }
    if (!root["experiment"]) throw ValidationError("missing required key 'experiment'");
    const auto& sch = schema(root["experiment"].as<std::string>());

    YAML::Node params = root["parameters"] ? YAML::Clone(root["parameters"]) : YAML::Node(YAML::NodeType::Map);
    if (!params.IsMap()) throw ValidationError("'parameters' must be a mapping");
    YAML::Node top = YAML::Clone(root);
    for (const auto& a : ov.assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + a + "' is not of the form key=value");
        const std::string key = a.substr(0, eq);
        YAML::Node value;
        try {
            value = YAML::Load(a.substr(eq + 1));
        } catch (const YAML::Exception& e) {
            throw ValidationError("override '" + a + "': " + e.what());
        }
        if (key == "seed" || key == "units" || key == "output_dir")
            top[key] = value;
        else if (key == "experiment")
            throw ValidationError("the experiment cannot be overridden");
        else
            params[key] = value;
    }

    ResolvedConfig out;
    json& c = out.config;
    c["experiment"] = sch.name;
    try {
        c["seed"] = top["seed"] ? top["seed"].as<std::uint64_t>() : std::uint64_t{0};
    } catch (const YAML::Exception&) {
        throw ValidationError("'seed' must be a nonnegative 64-bit integer");
    }
    if (ov.seed) c["seed"] = *ov.seed;

    const std::string units = top["units"] ? top["units"].as<std::string>() : "dimensionless";
    UnitSystem sys;
    if (units == "dimensionless")
        sys = UnitSystem::Dimensionless;
    else if (units == "si")
        sys = UnitSystem::Si;
    else
        throw ValidationError("'units' must be 'dimensionless' or 'si'");
    if (std::find(sch.systems.begin(), sch.systems.end(), sys) == sch.systems.end())
        throw ValidationError("experiment '" + sch.name + "' does not support units '" + units + "'");
    c["units"] = units;
    c["output_dir"] = ov.output_dir ? *ov.output_dir
                                    : (top["output_dir"] ? top["output_dir"].as<std::string>() : "out/" + sch.name);

    json p = json::object();
    for (const auto& kv : params) {
        const auto key = kv.first.as<std::string>();
        const auto it = std::find_if(sch.params.begin(), sch.params.end(), [&](const auto& s) { return s.name == key; });
        if (it == sch.params.end()) throw ValidationError("unknown parameter '" + key + "' for experiment '" + sch.name + "'");
        if (it->system != UnitSystem::Any && it->system != sys)
            throw ValidationError("parameter '" + key + "' belongs to unit system '" + unit_name(it->system)
                                  + "' but the run declares '" + units + "'");
        p[key] = detail::convert(kv.second, *it);
    }
    for (const auto& spec : sch.params) {
        if (spec.system != UnitSystem::Any && spec.system != sys) continue;
        if (!p.contains(spec.name)) p[spec.name] = spec.default_value;
        if (spec.is_path && !p[spec.name].get<std::string>().empty()) {
            std::filesystem::path f = p[spec.name].get<std::string>();
            if (f.is_relative()) f = base_dir / f;
            f = f.lexically_normal();
            if (!std::filesystem::is_regular_file(f))
                throw ValidationError("input file for '" + spec.name + "' not found: " + f.string());
            p[spec.name] = f.string();
            out.input_files[spec.name] = f.string();
        }
    }
    c["parameters"] = p;
    return out;
}

inline ResolvedConfig load_config(const std::filesystem::path& file, const Overrides& ov)
{
    if (!std::filesystem::is_regular_file(file)) throw ValidationError("config file not found: " + file.string());
    YAML::Node root;
    try {
        root = YAML::LoadFile(file.string());
    } catch (const YAML::Exception& e) {
        throw ValidationError("cannot parse " + file.string() + ": " + e.what());
    }
    try {
        auto r = resolve(root, ov, std::filesystem::absolute(file).parent_path());
        r.source = file.string();
        return r;
    } catch (const YAML::Exception& e) {
        throw ValidationError(file.string() + ": " + e.what());
    }
}

} // namespace modeflow::cli
