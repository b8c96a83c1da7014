#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wigner/ensembles.hpp"
#include "wigner/spectral.hpp"
#include "wigner/statistics.hpp"

namespace wigner::experiments {

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct IsotropicParams {
    std::vector<cplx> z_grid;       ///< empty: default grid
    double exterior_offset = 0.25;  ///< |E| >= 2 + offset uses the exterior control parameter
    int vector_pairs = 4;
    bool standard_vectors = false;  ///< also test (e_1, e_1) and (e_1, e_2)
};

struct OutlierParams {
    int oracle_checks = 20;
    double oracle_gap = 1e-6;
    double ks_one_sample = 0.095;
    double ks_two_sample = 0.12;
    long reference_draws = 100000;
    double mean_band_se = 4.0;
    double variance_rel_tol = 0.25;
    long min_trials = 50;
    bool interlacing_check = true;
};

struct BbpParams {
    std::vector<double> w_grid;  ///< empty: default grid
    double edge_rel_tol = 0.25;
    double super_w_min = 10.0;   ///< w >= this asserts mean N^{2/3}(μ_N - 2) ≈ w²
    double sub_w_max = -10.0;    ///< w <= this asserts sticking
    double sticking_band = 1.0;  ///< bound on mean N^{2/3}|μ_N - λ_N| when sticking
};

struct ExperimentConfig {
    std::string experiment;
    ensembles::EnsembleSpec ensemble;
    std::optional<ensembles::DeformationSpec> deformation;
    long trials = 100;
    std::uint64_t master_seed = 0;
    double bound_multiplier = 10.0;  ///< stands in for the polylogarithmic factors
    double pass_fraction = 0.99;     ///< required fraction of trials within the bound
    double sigma = 3.0;
    long window = 0;                 ///< edge index window; 0 means ceil(log² N)
    std::string vector_recipe = "uniform";
    IsotropicParams isotropic;
    OutlierParams outlier;
    BbpParams bbp;
    double oracle_tolerance = 1e-8;
    std::vector<long> scaling_sizes;
    double scaling_ratio_limit = 1.5;
    unsigned workers = 0;  ///< 0: hardware concurrency; never affects results

    long resolved_window() const;
    unsigned resolved_workers() const;
};

struct Series {
    std::string name;
    std::vector<double> samples;
    stats::Summary summary;
};

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation;  ///< "<=" or ">="
    bool passed = false;
    bool gating = true;    ///< informational checks never fail a report
};

struct ExperimentReport {
    std::string experiment;
    std::vector<Series> series;  ///< series.front() is the primary statistic
    double pass_fraction = 1.0;
    std::vector<Check> checks;
    std::map<std::string, double> metrics;
    std::vector<std::string> warnings;

    bool passed() const;
    const Series& series_named(const std::string& name) const;
    const Check& check_named(const std::string& name) const;
    void add_check(std::string name, double value, std::string relation, double threshold, bool gating = true);
};

// ---------------------------------------------------------------------------
// Trial runner
// ---------------------------------------------------------------------------

/// Runs f(0), ..., f(trials - 1) on up to `workers` threads. Results are stored
/// by trial index, so the output never depends on scheduling.
template <typename Result, typename F>
std::vector<Result> run_trials(long trials, unsigned workers, F&& f) {
    std::vector<Result> out(static_cast<std::size_t>(trials));
    std::atomic<long> next{0};
    std::vector<std::exception_ptr> errors(std::max(1u, workers));
    auto work = [&](unsigned slot) {
        try {
            for (long r = next++; r < trials; r = next++) out[static_cast<std::size_t>(r)] = f(r);
        } catch (...) {
            errors[slot] = std::current_exception();
            next = trials;
        }
    };
    const unsigned threads = static_cast<unsigned>(std::min<long>(std::max(1u, workers), trials));
    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-matrix statistics (deterministic given a decomposition)
// ---------------------------------------------------------------------------

std::vector<cplx> default_z_grid();

struct IsotropicStatistic {
    double max_ratio = 0.0;
    double interior_max = 0.0;
    double exterior_max = 0.0;
    double max_residual = 0.0;
};

/// max over z and vector pairs of |<v,G w> - m <v,w>| divided by Ψ(z) (interior)
/// or sqrt(Im m / (Nη)) (exterior, |E| >= 2 + offset).
template <typename Scalar>
IsotropicStatistic isotropic_statistic(const spectral::SpectralDecomposition<Scalar>& dec,
                                       const std::vector<std::pair<Vector<Scalar>, Vector<Scalar>>>& pairs,
                                       const std::vector<cplx>& z_grid, double exterior_offset);

/// max_α |λ_α - γ_α| N^{2/3} min(α, N + 1 - α)^{1/3}.
double rigidity_statistic(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& classical);

struct DelocalizationStatistic {
    double sup_overlap = 0.0;     ///< N sup_α |<u_α, v>|²
    double window_average = 0.0;  ///< N max over index windows of the mean |<u_α, v>|²
    double edge_entry_sum = 0.0;  ///< max over edge α of |Σ_i u_α(i)|
};

template <typename Scalar>
DelocalizationStatistic delocalization_statistic(const spectral::SpectralDecomposition<Scalar>& dec,
                                                 const Vector<Scalar>& v, long window);

/// Deterministic unit vector for the delocalization experiment.
template <typename Scalar>
Vector<Scalar> recipe_vector(const std::string& recipe, long n, std::uint64_t seed);

/// Draws of N^{1/2}<v, H v> for a fresh matrix of the ensemble. Entries on the
/// large coordinates of v are drawn exactly from the entry law; the remaining
/// terms are replaced by a Gaussian of exactly matching variance.
class HvSampler {
public:
    HvSampler(const ensembles::EnsembleSpec& spec, const Eigen::VectorXcd& v);
    double operator()(Rng& rng) const;
    const std::vector<long>& exact_indices() const { return exact_; }
    double gaussian_variance() const { return rest_variance_; }

private:
    ensembles::EnsembleSpec spec_;
    Eigen::VectorXcd v_;
    std::vector<long> exact_;
    double rest_variance_ = 0.0;
};

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

ExperimentReport run_isotropic_law(const ExperimentConfig& cfg);
ExperimentReport run_rigidity(const ExperimentConfig& cfg);
ExperimentReport run_delocalization(const ExperimentConfig& cfg, const std::string& v_recipe);
ExperimentReport run_outlier_location(const ExperimentConfig& cfg);
ExperimentReport run_outlier_distribution(const ExperimentConfig& cfg);
ExperimentReport run_sticking(const ExperimentConfig& cfg);
ExperimentReport run_bbp_scan(const ExperimentConfig& cfg, const std::vector<double>& w_grid);
/// Determinant identity against eigh on fresh random instances.
ExperimentReport run_oracle_check(const ExperimentConfig& cfg);

struct ScalingResult {
    std::vector<long> sizes;
    std::vector<double> medians;
    std::vector<double> ratios;  ///< medians[j+1] / medians[j]
    double max_ratio = 0.0;
};

/// Medians of the primary statistic of `runner` across matrix sizes.
template <typename Runner>
ScalingResult run_scaling(ExperimentConfig cfg, const std::vector<long>& sizes, Runner&& runner) {
    ScalingResult out;
    for (long n : sizes) {
        cfg.ensemble.n = n;
        const ExperimentReport report = runner(cfg);
        out.sizes.push_back(n);
        out.medians.push_back(stats::median(report.series.front().samples));
    }
    for (std::size_t j = 1; j < out.medians.size(); ++j) {
        out.ratios.push_back(out.medians[j] / out.medians[j - 1]);
        out.max_ratio = std::max(out.max_ratio, out.ratios.back());
    }
    return out;
}

/// Records a scaling sweep as metrics plus a gating check on the largest ratio.
void attach_scaling(ExperimentReport& report, const ScalingResult& scaling, double ratio_limit);

/// Dispatches an experiment by CLI subcommand name, including an optional scaling sweep.
ExperimentReport run_named(const ExperimentConfig& cfg);

}  // namespace wigner::experiments
