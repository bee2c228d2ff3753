#pragma once

// Output bookkeeping shared by `run` and `gen`: every file goes under one
// directory, is digested, and is listed in manifest.json.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "modeflow/io/csv.hpp"
#include "modeflow/io/digest.hpp"

namespace modeflow::cli {

using nlohmann::json;

inline constexpr int manifest_version = 1;

class RunContext {
public:
    explicit RunContext(std::filesystem::path out_dir) : dir_(std::move(out_dir))
    {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    void write(const std::string& name, const std::string& text)
    {
        const auto path = dir_ / name;
        io::write_text(path.string(), text);
        outputs_.push_back({{"path", name}, {"bytes", text.size()}, {"sha256", io::sha256_hex(text)}});
        spdlog::debug("wrote {}", path.string());
    }

    void write_csv(const std::string& name, const io::Table& t) { write(name, io::to_csv(t)); }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    const json& outputs() const { return outputs_; }

private:
    std::filesystem::path dir_;
    json outputs_ = json::array();
};

/// Writes manifest.json (not itself listed among the outputs).
inline json write_manifest(const RunContext& ctx, const json& config, const json& inputs, double seconds, const json& extra = {})
{
    json m;
    m["manifest_version"] = manifest_version;
    m["tool"] = "modeflow";
    m["version"] = MODEFLOW_VERSION;
    m["config"] = config;
    m["inputs"] = inputs;
    m["outputs"] = ctx.outputs();
    m["duration_seconds"] = seconds;
    if (!extra.is_null()) m["extra"] = extra;
    io::write_text((ctx.dir() / "manifest.json").string(), m.dump(2) + "\n");
    return m;
}

inline json digest_inputs(const std::vector<std::pair<std::string, std::string>>& files)
{
    json out = json::array();
    for (const auto& [role, path] : files) {
        const auto text = io::read_text(path);
        out.push_back({{"role", role}, {"path", path}, {"sha256", io::sha256_hex(text)}});
    }
    return out;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

} // namespace modeflow::cli
