#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wigner/experiments.hpp"

namespace wigner::config {

inline constexpr const char* tool_version = "1.0.0";

using nlohmann::json;

/// Subcommands in dispatch order.
const std::vector<std::string>& subcommands();

/// Defaults for a subcommand, before any file or flag is applied.
experiments::ExperimentConfig defaults_for(const std::string& subcommand);

/// Canonical JSON of a configuration. Keys mirror the CLI flag names; the
/// worker count is deliberately absent since it never changes results.
json to_json(const experiments::ExperimentConfig& cfg);

/// Applies the keys present in `j` on top of `base`. Values may be native JSON
/// or the string spelling used on the command line. Throws ConfigError on
/// unknown keys or malformed values.
experiments::ExperimentConfig apply_json(const json& j, experiments::ExperimentConfig base);

std::vector<double> parse_real_list(const std::string& text);
std::vector<cplx> parse_z_grid(const std::string& text);

struct RunManifest {
    std::string subcommand;
    experiments::ExperimentConfig config;
    std::string version = tool_version;
    std::optional<double> wall_clock_seconds;  ///< only recorded on request, to keep reruns byte-identical

    std::uint64_t master_seed() const { return config.master_seed; }
};

json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const json& j);

}  // namespace wigner::config
