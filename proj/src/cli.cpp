#include "wigner/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wigner/config.hpp"
#include "wigner/experiments.hpp"
#include "wigner/report_io.hpp"

namespace wigner::cli {

namespace {

using config::json;
using experiments::ConfigError;

struct Flag {
    const char* key;    ///< configuration key
    const char* names;  ///< CLI11 option names
    const char* help;
};

// Option groups; each subcommand takes the common group plus its own.
const std::vector<Flag> common_flags = {
    {"beta", "--beta", "symmetry class: 1 (real symmetric) or 2 (complex Hermitian)"},
    {"family", "--family", "entry law: gaussian, rademacher, skewed_two_point, uniform"},
    {"skew", "--skew", "third moment t of skewed_two_point"},
    {"N", "-N", "matrix size"},
    {"decay", "--decay", "subexponential decay constant (metadata)"},
    {"trials", "--trials", "number of independent trials"},
    {"seed", "--seed", "master seed (fallback: WIGNER_LAB_SEED, then 0)"},
    {"bound-multiplier", "-B,--bound-multiplier", "constant standing in for polylogarithmic factors"},
    {"pass-fraction", "--pass-fraction", "required fraction of trials within the bound"},
    {"sigma", "--sigma", "spectral window half-width, at least 3"},
    {"scaling", "--scaling", "comma-separated sizes for a median scaling sweep"},
    {"scaling-ratio", "--scaling-ratio", "largest allowed ratio of successive medians"},
    {"workers", "--workers", "worker threads (default: available parallelism)"},
};

const std::vector<Flag> deformation_flags = {
    {"d", "-d", "comma-separated nondecreasing nonzero deformation eigenvalues"},
    {"basis", "--basis", "standard, uniform, random, spike_plus_flat or explicit (config file only)"},
};

const std::vector<Flag> oracle_flags = {
    {"oracle-tolerance", "--oracle-tolerance", "largest allowed |root - eigenvalue|"},
    {"oracle-gap", "--oracle-gap", "exterior eigenvalues start this far beyond the spectrum of H"},
};

const std::map<std::string, std::vector<Flag>> own_flags = {
    {"isotropic",
     {{"z-grid", "--z-grid", "spectral parameters as E:eta,E:eta,..."},
      {"exterior-offset", "--exterior-offset", "|E| >= 2 + offset uses the exterior control parameter"},
      {"pairs", "--pairs", "number of random test vector pairs"}}},
    {"rigidity", {}},
    {"deloc",
     {{"vector", "--vector", "test vector: uniform, standard, spike_plus_flat or random"},
      {"window", "--window", "eigenvalue index window (0: ceil(log^2 N))"}}},
    {"outlier-loc",
     {{"oracle-checks", "--oracle-checks", "trials cross-checked against the determinant identity"},
      {"mean-band-se", "--mean-band-se", "mean band in standard errors"},
      {"variance-rel-tol", "--variance-rel-tol", "relative variance band"},
      {"interlacing-check", "--interlacing-check", "true or false"}}},
    {"outlier-dist",
     {{"oracle-checks", "--oracle-checks", "trials cross-checked against the determinant identity"},
      {"mean-band-se", "--mean-band-se", "mean band in standard errors"},
      {"variance-rel-tol", "--variance-rel-tol", "relative variance band"},
      {"interlacing-check", "--interlacing-check", "true or false"},
      {"ks-one-sample", "--ks1,--ks-one-sample", "threshold for KS against the Gaussian prediction"},
      {"ks-two-sample", "--ks2,--ks-two-sample", "threshold for KS against predicted-law draws"},
      {"reference-draws", "--reference-draws", "draws from the predicted law"},
      {"min-trials", "--min-trials", "smallest accepted trial count"}}},
    {"sticking", {{"window", "--window", "eigenvalue index window (0: ceil(log^2 N))"}}},
    {"bbp-scan",
     {{"w-grid", "--w-grid", "comma-separated w, with d = 1 + w N^{-1/3}"},
      {"bbp-rel-tol", "--bbp-rel-tol", "relative band for the supercritical edge"},
      {"bbp-super-w", "--bbp-super-w", "w at or above which the edge is checked"},
      {"bbp-sub-w", "--bbp-sub-w", "w at or below which sticking is checked"},
      {"sticking-band", "--sticking-band", "bound on the mean sticking statistic"}}},
    {"oracle-check", {}},
};

const std::map<std::string, std::string> descriptions = {
    {"isotropic", "isotropic local law for <v, G(z) w>"},
    {"rigidity", "eigenvalue rigidity against classical locations"},
    {"deloc", "eigenvector delocalization along a fixed direction"},
    {"outlier-loc", "outlier locations of a finite-rank deformation"},
    {"outlier-dist", "outlier fluctuations against the predicted law"},
    {"sticking", "extremal bulk eigenvalues sticking to the undeformed spectrum"},
    {"bbp-scan", "scan of the top eigenvalue across the transition d = 1 + w N^{-1/3}"},
    {"oracle-check", "determinant identity against the eigensolver"},
};

bool uses_deformation(const std::string& name) {
    return name == "outlier-loc" || name == "outlier-dist" || name == "sticking" || name == "bbp-scan" ||
           name == "oracle-check";
}

bool uses_oracle(const std::string& name) {
    return name == "outlier-loc" || name == "outlier-dist" || name == "oracle-check";
}

struct Subcommand {
    CLI::App* app = nullptr;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    bool standard_vectors = false;
    CLI::Option* standard_vectors_flag = nullptr;
};

json load_config_file(const std::string& path, const std::string& subcommand) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    // A summary file or a bare manifest replays its resolved configuration.
    if (j.is_object() && j.contains("manifest")) j = j.at("manifest");
    if (j.is_object() && j.contains("subcommand") && j.contains("config")) {
        if (j.at("subcommand") != subcommand) {
            throw ConfigError("config file was written by '" + j.at("subcommand").get<std::string>() + "'");
        }
        return j.at("config");
    }
    return j;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo experiments on deformed Wigner matrices", "wigner-lab"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", config::tool_version);

    std::map<std::string, std::string> values;
    std::string out_dir;
    std::string config_path;
    bool timing = false;
    std::map<std::string, Subcommand> subs;

    for (const auto& name : config::subcommands()) {
        Subcommand s;
        s.app = app.add_subcommand(name, descriptions.at(name));
        auto add = [&](const Flag& f) {
            s.options.emplace_back(f.key, s.app->add_option(f.names, values[f.key], f.help));
        };
        for (const auto& f : common_flags) add(f);
        if (uses_deformation(name)) {
            for (const auto& f : deformation_flags) add(f);
        }
        if (uses_oracle(name)) {
            for (const auto& f : oracle_flags) add(f);
        }
        for (const auto& f : own_flags.at(name)) add(f);
        s.app->add_option("--out", out_dir, "output directory for CSV and JSON (default: JSON on stdout)");
        s.app->add_option("--config", config_path, "JSON file with keys named like the flags, or a manifest");
        s.app->add_flag("--timing", timing, "record wall-clock time in the manifest");
        subs.emplace(name, std::move(s));
    }
    // Flags with no value need their own storage.
    auto& iso = subs.at("isotropic");
    iso.standard_vectors_flag =
        iso.app->add_flag("--standard-vectors", iso.standard_vectors, "also test (e_1, e_1) and (e_1, e_2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const Subcommand& sub = subs.at(name);

    try {
        json overrides = json::object();
        for (const auto& [key, opt] : sub.options) {
            if (opt->count() > 0) overrides[key] = values.at(key);
        }
        if (sub.standard_vectors_flag && sub.standard_vectors_flag->count() > 0) {
            overrides["standard-vectors"] = true;
        }

        json file = config_path.empty() ? json::object() : load_config_file(config_path, name);
        if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
        bool seeded = file.contains("seed") || overrides.contains("seed");
        if (!seeded) {
            if (const char* env = std::getenv("WIGNER_LAB_SEED"); env != nullptr && *env != '\0') {
                overrides["seed"] = std::string(env);
            }
        }

        experiments::ExperimentConfig cfg = config::defaults_for(name);
        cfg = config::apply_json(file, cfg);
        cfg = config::apply_json(overrides, cfg);
        cfg.experiment = name;

        const auto start = std::chrono::steady_clock::now();
        const experiments::ExperimentReport report = experiments::run_named(cfg);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

        config::RunManifest manifest;
        manifest.subcommand = name;
        manifest.config = cfg;
        if (timing) manifest.wall_clock_seconds = elapsed.count();

        if (out_dir.empty()) {
            out << report_io::full_json(report, manifest).dump(2) << '\n';
        } else {
            const auto files = report_io::emit_report(report, manifest, out_dir);
            out << files.samples.string() << '\n' << files.summary.string() << '\n';
            for (const auto& c : report.checks) {
                out << (c.passed ? "pass " : (c.gating ? "FAIL " : "info ")) << c.name << ": "
                    << report_io::shortest(c.value) << ' ' << c.relation << ' ' << report_io::shortest(c.threshold)
                    << '\n';
            }
            for (const auto& w : report.warnings) out << "warning: " << w << '\n';
        }
        return report.passed() ? 0 : 1;
    } catch (const std::exception& e) {
        // Configuration, validation and I/O failures all map to the usage exit code.
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace wigner::cli
