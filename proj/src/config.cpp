#include "wigner/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace wigner::config {

using experiments::ConfigError;
using experiments::ExperimentConfig;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"isotropic", "rigidity",  "deloc",    "outlier-loc",
                                                   "outlier-dist", "sticking", "bbp-scan", "oracle-check"};
    return names;
}

ExperimentConfig defaults_for(const std::string& subcommand) {
    if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    }
    ExperimentConfig cfg;
    cfg.experiment = subcommand;
    cfg.ensemble.n = 500;
    using ensembles::BasisRecipe;
    if (subcommand == "outlier-loc" || subcommand == "outlier-dist") {
        cfg.deformation = ensembles::DeformationSpec{{2.0}, BasisRecipe::uniform_vector, std::nullopt};
    } else if (subcommand == "sticking") {
        cfg.deformation = ensembles::DeformationSpec{{0.5}, BasisRecipe::uniform_vector, std::nullopt};
    } else if (subcommand == "bbp-scan") {
        cfg.deformation = ensembles::DeformationSpec{{}, BasisRecipe::uniform_vector, std::nullopt};
        cfg.bbp.w_grid = {-20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0};
    } else if (subcommand == "oracle-check") {
        cfg.ensemble.n = 128;
        cfg.trials = 20;
        cfg.deformation = ensembles::DeformationSpec{{-2.0, 0.5, 2.0}, BasisRecipe::random_orthonormal, std::nullopt};
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Value parsing: native JSON or command-line spelling
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

double parse_real(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    double x = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError(key + ": '" + text + "' is not a real number");
    }
    return x;
}

template <typename Int>
Int parse_integer(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    Int x = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError(key + ": '" + text + "' is not an integer");
    }
    return x;
}

double as_real(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_real(v.get<std::string>(), key);
    throw ConfigError(key + ": expected a number");
}

template <typename Int>
Int as_integer(const json& v, const std::string& key) {
    if (v.is_number_integer()) {
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.is_number_unsigned()) return v.get<Int>();
            if (v.get<long long>() < 0) throw ConfigError(key + ": must be non-negative");
        }
        return v.get<Int>();
    }
    if (v.is_string()) return parse_integer<Int>(v.get<std::string>(), key);
    throw ConfigError(key + ": expected an integer");
}

bool as_bool(const json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "true" || s == "1" || s == "on") return true;
        if (s == "false" || s == "0" || s == "off") return false;
    }
    throw ConfigError(key + ": expected true or false");
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(key + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> as_real_list(const json& v, const std::string& key) {
    if (v.is_string()) {
        std::vector<double> out;
        if (trim(v.get<std::string>()).empty()) return out;
        for (const auto& item : split(v.get<std::string>(), ',')) out.push_back(parse_real(item, key));
        return out;
    }
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(key + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(as_real(x, key));
    return out;
}

std::vector<long> as_integer_list(const json& v, const std::string& key) {
    std::vector<long> out;
    if (v.is_string()) {
        if (trim(v.get<std::string>()).empty()) return out;
        for (const auto& item : split(v.get<std::string>(), ',')) out.push_back(parse_integer<long>(item, key));
        return out;
    }
    if (!v.is_array()) throw ConfigError(key + ": expected a list of integers");
    for (const auto& x : v) out.push_back(as_integer<long>(x, key));
    return out;
}

std::vector<cplx> as_z_grid(const json& v, const std::string& key) {
    if (v.is_string()) return parse_z_grid(v.get<std::string>());
    if (!v.is_array()) throw ConfigError(key + ": expected a list of [E, eta] pairs");
    std::vector<cplx> out;
    for (const auto& p : v) {
        if (!p.is_array() || p.size() != 2) throw ConfigError(key + ": each point must be [E, eta]");
        out.emplace_back(as_real(p[0], key), as_real(p[1], key));
    }
    return out;
}

Eigen::MatrixXcd as_basis_matrix(const json& v, const std::string& key) {
    // Columns of the basis; entries are reals or [re, im] pairs.
    if (!v.is_array() || v.empty() || !v[0].is_array()) throw ConfigError(key + ": expected a list of columns");
    const long k = static_cast<long>(v.size());
    const long n = static_cast<long>(v[0].size());
    Eigen::MatrixXcd m(n, k);
    for (long c = 0; c < k; ++c) {
        const auto& col = v[static_cast<std::size_t>(c)];
        if (!col.is_array() || static_cast<long>(col.size()) != n) throw ConfigError(key + ": ragged columns");
        for (long r = 0; r < n; ++r) {
            const auto& e = col[static_cast<std::size_t>(r)];
            if (e.is_array()) {
                if (e.size() != 2) throw ConfigError(key + ": complex entries are [re, im]");
                m(r, c) = cplx(as_real(e[0], key), as_real(e[1], key));
            } else {
                m(r, c) = as_real(e, key);
            }
        }
    }
    return m;
}

ensembles::DeformationSpec& deformation_of(ExperimentConfig& cfg) {
    if (!cfg.deformation) cfg.deformation = ensembles::DeformationSpec{};
    return *cfg.deformation;
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"beta", [](auto& c, const json& v, const auto& k) { c.ensemble.beta = as_integer<int>(v, k); }},
        {"family",
         [](auto& c, const json& v, const auto& k) {
             try {
                 c.ensemble.family = ensembles::family_from_string(as_string(v, k));
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(e.what());
             }
         }},
        {"skew", [](auto& c, const json& v, const auto& k) { c.ensemble.skew = as_real(v, k); }},
        {"N", [](auto& c, const json& v, const auto& k) { c.ensemble.n = as_integer<long>(v, k); }},
        {"decay", [](auto& c, const json& v, const auto& k) { c.ensemble.decay = as_real(v, k); }},
        {"d",
         [](auto& c, const json& v, const auto& k) {
             auto d = as_real_list(v, k);
             if (d.empty() && !c.deformation) return;
             deformation_of(c).d = std::move(d);
         }},
        {"basis",
         [](auto& c, const json& v, const auto& k) {
             try {
                 deformation_of(c).recipe = ensembles::recipe_from_string(as_string(v, k));
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(e.what());
             }
         }},
        {"basis-matrix",
         [](auto& c, const json& v, const auto& k) { deformation_of(c).explicit_basis = as_basis_matrix(v, k); }},
        {"trials", [](auto& c, const json& v, const auto& k) { c.trials = as_integer<long>(v, k); }},
        {"seed", [](auto& c, const json& v, const auto& k) { c.master_seed = as_integer<std::uint64_t>(v, k); }},
        {"bound-multiplier", [](auto& c, const json& v, const auto& k) { c.bound_multiplier = as_real(v, k); }},
        {"pass-fraction", [](auto& c, const json& v, const auto& k) { c.pass_fraction = as_real(v, k); }},
        {"sigma", [](auto& c, const json& v, const auto& k) { c.sigma = as_real(v, k); }},
        {"window", [](auto& c, const json& v, const auto& k) { c.window = as_integer<long>(v, k); }},
        {"vector", [](auto& c, const json& v, const auto& k) { c.vector_recipe = as_string(v, k); }},
        {"z-grid", [](auto& c, const json& v, const auto& k) { c.isotropic.z_grid = as_z_grid(v, k); }},
        {"exterior-offset",
         [](auto& c, const json& v, const auto& k) { c.isotropic.exterior_offset = as_real(v, k); }},
        {"pairs", [](auto& c, const json& v, const auto& k) { c.isotropic.vector_pairs = as_integer<int>(v, k); }},
        {"standard-vectors",
         [](auto& c, const json& v, const auto& k) { c.isotropic.standard_vectors = as_bool(v, k); }},
        {"oracle-checks",
         [](auto& c, const json& v, const auto& k) { c.outlier.oracle_checks = as_integer<int>(v, k); }},
        {"oracle-gap", [](auto& c, const json& v, const auto& k) { c.outlier.oracle_gap = as_real(v, k); }},
        {"oracle-tolerance", [](auto& c, const json& v, const auto& k) { c.oracle_tolerance = as_real(v, k); }},
        {"ks-one-sample", [](auto& c, const json& v, const auto& k) { c.outlier.ks_one_sample = as_real(v, k); }},
        {"ks-two-sample", [](auto& c, const json& v, const auto& k) { c.outlier.ks_two_sample = as_real(v, k); }},
        {"reference-draws",
         [](auto& c, const json& v, const auto& k) { c.outlier.reference_draws = as_integer<long>(v, k); }},
        {"mean-band-se", [](auto& c, const json& v, const auto& k) { c.outlier.mean_band_se = as_real(v, k); }},
        {"variance-rel-tol",
         [](auto& c, const json& v, const auto& k) { c.outlier.variance_rel_tol = as_real(v, k); }},
        {"min-trials", [](auto& c, const json& v, const auto& k) { c.outlier.min_trials = as_integer<long>(v, k); }},
        {"interlacing-check",
         [](auto& c, const json& v, const auto& k) { c.outlier.interlacing_check = as_bool(v, k); }},
        {"w-grid", [](auto& c, const json& v, const auto& k) { c.bbp.w_grid = as_real_list(v, k); }},
        {"bbp-rel-tol", [](auto& c, const json& v, const auto& k) { c.bbp.edge_rel_tol = as_real(v, k); }},
        {"bbp-super-w", [](auto& c, const json& v, const auto& k) { c.bbp.super_w_min = as_real(v, k); }},
        {"bbp-sub-w", [](auto& c, const json& v, const auto& k) { c.bbp.sub_w_max = as_real(v, k); }},
        {"sticking-band", [](auto& c, const json& v, const auto& k) { c.bbp.sticking_band = as_real(v, k); }},
        {"scaling", [](auto& c, const json& v, const auto& k) { c.scaling_sizes = as_integer_list(v, k); }},
        {"scaling-ratio", [](auto& c, const json& v, const auto& k) { c.scaling_ratio_limit = as_real(v, k); }},
        {"workers", [](auto& c, const json& v, const auto& k) { c.workers = as_integer<unsigned>(v, k); }},
    };
    return table;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) { return as_real_list(json(text), "list"); }

std::vector<cplx> parse_z_grid(const std::string& text) {
    // "E:eta,E:eta,..."
    std::vector<cplx> out;
    for (const auto& item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw ConfigError("z-grid: expected E:eta, got '" + item + "'");
        out.emplace_back(parse_real(parts[0], "z-grid"), parse_real(parts[1], "z-grid"));
    }
    return out;
}

ExperimentConfig apply_json(const json& j, ExperimentConfig base) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    // "basis" before "d" before "basis-matrix" does not matter; each setter is independent.
    for (const auto& [key, value] : j.items()) {
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
        if (value.is_null()) continue;
        it->second(base, value, key);
    }
    return base;
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["beta"] = cfg.ensemble.beta;
    j["family"] = ensembles::to_string(cfg.ensemble.family);
    j["skew"] = cfg.ensemble.skew;
    j["N"] = cfg.ensemble.n;
    j["decay"] = cfg.ensemble.decay;
    if (cfg.deformation) {
        j["d"] = cfg.deformation->d;
        j["basis"] = ensembles::to_string(cfg.deformation->recipe);
        if (cfg.deformation->explicit_basis) {
            const auto& m = *cfg.deformation->explicit_basis;
            json cols = json::array();
            for (long c = 0; c < m.cols(); ++c) {
                json col = json::array();
                for (long r = 0; r < m.rows(); ++r) col.push_back({m(r, c).real(), m(r, c).imag()});
                cols.push_back(std::move(col));
            }
            j["basis-matrix"] = std::move(cols);
        }
    } else {
        j["d"] = json::array();
    }
    j["trials"] = cfg.trials;
    j["seed"] = cfg.master_seed;
    j["bound-multiplier"] = cfg.bound_multiplier;
    j["pass-fraction"] = cfg.pass_fraction;
    j["sigma"] = cfg.sigma;
    j["window"] = cfg.window;
    j["vector"] = cfg.vector_recipe;
    json grid = json::array();
    for (cplx z : cfg.isotropic.z_grid) grid.push_back({z.real(), z.imag()});
    j["z-grid"] = std::move(grid);
    j["exterior-offset"] = cfg.isotropic.exterior_offset;
    j["pairs"] = cfg.isotropic.vector_pairs;
    j["standard-vectors"] = cfg.isotropic.standard_vectors;
    j["oracle-checks"] = cfg.outlier.oracle_checks;
    j["oracle-gap"] = cfg.outlier.oracle_gap;
    j["oracle-tolerance"] = cfg.oracle_tolerance;
    j["ks-one-sample"] = cfg.outlier.ks_one_sample;
    j["ks-two-sample"] = cfg.outlier.ks_two_sample;
    j["reference-draws"] = cfg.outlier.reference_draws;
    j["mean-band-se"] = cfg.outlier.mean_band_se;
    j["variance-rel-tol"] = cfg.outlier.variance_rel_tol;
    j["min-trials"] = cfg.outlier.min_trials;
    j["interlacing-check"] = cfg.outlier.interlacing_check;
    j["w-grid"] = cfg.bbp.w_grid;
    j["bbp-rel-tol"] = cfg.bbp.edge_rel_tol;
    j["bbp-super-w"] = cfg.bbp.super_w_min;
    j["bbp-sub-w"] = cfg.bbp.sub_w_max;
    j["sticking-band"] = cfg.bbp.sticking_band;
    j["scaling"] = cfg.scaling_sizes;
    j["scaling-ratio"] = cfg.scaling_ratio_limit;
    return j;
}

json to_json(const RunManifest& manifest) {
    json j;
    j["subcommand"] = manifest.subcommand;
    j["version"] = manifest.version;
    j["master_seed"] = manifest.master_seed();
    j["config"] = to_json(manifest.config);
    j["wall_clock_seconds"] = manifest.wall_clock_seconds ? json(*manifest.wall_clock_seconds) : json(nullptr);
    return j;
}

RunManifest manifest_from_json(const json& j) {
    if (!j.is_object() || !j.contains("subcommand") || !j.contains("config")) {
        throw ConfigError("manifest needs 'subcommand' and 'config'");
    }
    RunManifest m;
    m.subcommand = as_string(j.at("subcommand"), "subcommand");
    ExperimentConfig base = defaults_for(m.subcommand);
    // The canonical form lists every key, so the deformation is exactly what was serialized.
    base.deformation.reset();
    m.config = apply_json(j.at("config"), base);
    if (j.contains("version")) m.version = as_string(j.at("version"), "version");
    if (j.contains("master_seed") && as_integer<std::uint64_t>(j.at("master_seed"), "master_seed") != m.config.master_seed) {
        throw ConfigError("manifest master_seed disagrees with config seed");
    }
    if (j.contains("wall_clock_seconds") && !j.at("wall_clock_seconds").is_null()) {
        m.wall_clock_seconds = as_real(j.at("wall_clock_seconds"), "wall_clock_seconds");
    }
    return m;
}

}  // namespace wigner::config
