#include "wigner/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace wigner::report_io {

using nlohmann::json;

std::string shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_samples_csv(const experiments::ExperimentReport& report, std::ostream& os) {
    const bool multi = report.series.size() > 1;
    os << (multi ? "trial,statistic,component\n" : "trial,statistic\n");
    std::size_t trials = 0;
    for (const auto& s : report.series) trials = std::max(trials, s.samples.size());
    for (std::size_t t = 0; t < trials; ++t) {
        for (const auto& s : report.series) {
            if (t >= s.samples.size()) continue;
            os << t << ',' << shortest(s.samples[t]);
            if (multi) os << ',' << s.name;
            os << '\n';
        }
    }
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json series_json(const experiments::Series& s) {
    const auto& m = s.summary;
    json j;
    j["name"] = s.name;
    j["count"] = m.count;
    j["mean"] = finite_or_null(m.mean);
    j["variance"] = finite_or_null(m.variance);
    j["std_error"] = finite_or_null(m.std_error);
    j["min"] = finite_or_null(m.min);
    j["max"] = finite_or_null(m.max);
    j["ks_distance"] = m.ks_distance ? finite_or_null(*m.ks_distance) : json(nullptr);
    j["reference"] = m.reference;
    j["ecdf_x"] = m.ecdf_x;
    j["ecdf_y"] = m.ecdf_y;
    return j;
}

}  // namespace

json summary_json(const experiments::ExperimentReport& report, const config::RunManifest& manifest) {
    json j;
    j["manifest"] = config::to_json(manifest);
    j["experiment"] = report.experiment;
    j["passed"] = report.passed();
    j["pass_fraction"] = report.pass_fraction;
    json summaries = json::array();
    for (const auto& s : report.series) summaries.push_back(series_json(s));
    j["summaries"] = std::move(summaries);
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"value", finite_or_null(c.value)},
                          {"relation", c.relation},
                          {"threshold", c.threshold},
                          {"passed", c.passed},
                          {"gating", c.gating}});
    }
    j["checks"] = std::move(checks);
    json metrics = json::object();
    for (const auto& [k, v] : report.metrics) metrics[k] = finite_or_null(v);
    j["metrics"] = std::move(metrics);
    j["warnings"] = report.warnings;
    return j;
}

json full_json(const experiments::ExperimentReport& report, const config::RunManifest& manifest) {
    json j = summary_json(report, manifest);
    json samples = json::object();
    for (const auto& s : report.series) {
        json values = json::array();
        for (double x : s.samples) values.push_back(finite_or_null(x));
        samples[s.name] = std::move(values);
    }
    j["samples"] = std::move(samples);
    return j;
}

EmittedFiles emit_report(const experiments::ExperimentReport& report, const config::RunManifest& manifest,
                         const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw IoError("cannot create output directory " + out_dir.string());
    }
    EmittedFiles files{out_dir / (manifest.subcommand + "_samples.csv"),
                       out_dir / (manifest.subcommand + "_summary.json")};
    {
        std::ofstream os(files.samples, std::ios::binary);
        if (!os) throw IoError("cannot write " + files.samples.string());
        write_samples_csv(report, os);
        if (!os) throw IoError("write failed: " + files.samples.string());
    }
    {
        std::ofstream os(files.summary, std::ios::binary);
        if (!os) throw IoError("cannot write " + files.summary.string());
        os << summary_json(report, manifest).dump(2) << '\n';
        if (!os) throw IoError("write failed: " + files.summary.string());
    }
    return files;
}

}  // namespace wigner::report_io
