#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wigner/config.hpp"
#include "wigner/experiments.hpp"

namespace wigner::report_io {

/// Destination cannot be created or written (CLI exit code 2).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest decimal that round-trips to the same double.
std::string shortest(double x);

/// `trial,statistic` rows in trial order; a `component` column naming the
/// series is added when the report has more than one.
void write_samples_csv(const experiments::ExperimentReport& report, std::ostream& os);

nlohmann::json summary_json(const experiments::ExperimentReport& report, const config::RunManifest& manifest);

/// Summary plus every sample, for runs without an output directory.
nlohmann::json full_json(const experiments::ExperimentReport& report, const config::RunManifest& manifest);

struct EmittedFiles {
    std::filesystem::path samples;
    std::filesystem::path summary;
};

/// Writes `<name>_samples.csv` and `<name>_summary.json` under `out_dir`,
/// where name is the subcommand.
EmittedFiles emit_report(const experiments::ExperimentReport& report, const config::RunManifest& manifest,
                         const std::filesystem::path& out_dir);

}  // namespace wigner::report_io
