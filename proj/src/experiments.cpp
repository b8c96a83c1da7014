#include "wigner/experiments.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace wigner::experiments {

using ensembles::DeformationSpec;
using ensembles::EnsembleSpec;
using spectral::EigenMode;
using spectral::SpectralDecomposition;

long ExperimentConfig::resolved_window() const {
    if (window > 0) return window;
    const double l = std::log(static_cast<double>(std::max<long>(ensemble.n, 2)));
    return static_cast<long>(std::ceil(l * l));
}

unsigned ExperimentConfig::resolved_workers() const {
    if (workers > 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

bool ExperimentReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || !c.gating; });
}

const Series& ExperimentReport::series_named(const std::string& name) const {
    for (const auto& s : series) {
        if (s.name == name) return s;
    }
    throw std::out_of_range("no series named " + name);
}

const Check& ExperimentReport::check_named(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw std::out_of_range("no check named " + name);
}

void ExperimentReport::add_check(std::string name, double value, std::string relation, double threshold,
                                 bool gating) {
    Check c;
    c.name = std::move(name);
    c.value = value;
    c.threshold = threshold;
    c.relation = std::move(relation);
    c.passed = c.relation == ">=" ? value >= threshold : value <= threshold;
    c.gating = gating;
    checks.push_back(std::move(c));
}

namespace {

template <typename F>
decltype(auto) with_scalar(int beta, F&& f) {
    if (beta == 1) return f.template operator()<double>();
    return f.template operator()<cplx>();
}

std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Series make_series(std::string name, std::vector<double> samples,
                   const std::optional<stats::Reference>& reference = std::nullopt) {
    Series s;
    s.name = std::move(name);
    s.summary = stats::summarize(samples, reference);
    s.samples = std::move(samples);
    return s;
}

double fraction_true(const std::vector<char>& flags) {
    if (flags.empty()) return 1.0;
    const auto ok = std::count(flags.begin(), flags.end(), char{1});
    return static_cast<double>(ok) / static_cast<double>(flags.size());
}

void validate_common(const ExperimentConfig& cfg) {
    try {
        cfg.ensemble.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (cfg.trials < 1) throw ConfigError("trials must be positive");
    if (!(cfg.bound_multiplier > 0.0)) throw ConfigError("bound multiplier must be positive");
    if (!(cfg.pass_fraction > 0.0 && cfg.pass_fraction <= 1.0)) {
        throw ConfigError("pass fraction must lie in (0, 1]");
    }
    if (cfg.sigma < 3.0) throw ConfigError("sigma must be at least 3");
}

const DeformationSpec& require_deformation(const ExperimentConfig& cfg) {
    if (!cfg.deformation) throw ConfigError(cfg.experiment + ": a deformation is required");
    try {
        cfg.deformation->validate(cfg.ensemble.n);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return *cfg.deformation;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, long r) {
    return stream_seed(cfg.master_seed, Stream::trial, static_cast<std::uint64_t>(r));
}

template <typename Scalar>
Vector<Scalar> random_unit(long n, Rng& rng) {
    std::normal_distribution<double> normal;
    Vector<Scalar> v(n);
    for (long i = 0; i < n; ++i) {
        if constexpr (is_complex_v<Scalar>) {
            const double re = normal(rng);
            v(i) = Scalar(re, normal(rng));
        } else {
            v(i) = normal(rng);
        }
    }
    return v / v.norm();
}

template <typename Scalar>
Vector<Scalar> unit_vector(long n, long i) {
    Vector<Scalar> e = Vector<Scalar>::Zero(n);
    e(i) = Scalar(1);
    return e;
}

/// Warnings for the separation and non-degeneracy conditions, with the
/// polylogarithmic factors replaced by B.
std::vector<std::string> deformation_warnings(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    const auto& def = *cfg.deformation;
    const double n = static_cast<double>(cfg.ensemble.n);
    const double b = cfg.bound_multiplier;
    for (long i = 0; i < def.k(); ++i) {
        const double d = def.d[static_cast<std::size_t>(i)];
        if (std::abs(d) > cfg.sigma - 1.0) {
            out.push_back("d_" + std::to_string(i + 1) + " = " + format_number(d) + " exceeds sigma - 1");
        }
        if (std::abs(std::abs(d) - 1.0) < b * std::cbrt(1.0 / n)) {
            out.push_back("d_" + std::to_string(i + 1) + " = " + format_number(d) +
                          " is within B N^{-1/3} of the transition");
        }
    }
    for (long i : def.outlier_indices()) {
        const double di = def.d[static_cast<std::size_t>(i)];
        const double gap = b * std::pow(n, -0.5) * std::pow(std::abs(di) - 1.0, -0.5);
        for (long j = 0; j < def.k(); ++j) {
            if (j == i) continue;
            if (std::abs(di - def.d[static_cast<std::size_t>(j)]) < gap) {
                out.push_back("d_" + std::to_string(i + 1) + " and d_" + std::to_string(j + 1) +
                              " violate the non-degeneracy condition");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Determinant identity against the eigensolver
// ---------------------------------------------------------------------------

struct OracleComparison {
    double max_abs_diff = 0.0;
    long count_mismatch = 0;
    long near_pole = 0;  ///< eigenvalues of the deformed matrix within 1e-10 of σ(H)
    long compared = 0;
};

template <typename Scalar>
OracleComparison compare_with_det(const SpectralDecomposition<Scalar>& dec, const Matrix<Scalar>& basis,
                                  const std::vector<double>& d, const Eigen::VectorXd& mu, double gap) {
    const Eigen::VectorXd& lam = dec.eigenvalues;
    const long n = lam.size();
    const double lo = lam(0);
    const double hi = lam(n - 1);
    double pos = 0.0;
    double neg = 0.0;
    for (double x : d) (x > 0 ? pos : neg) += std::abs(x);

    std::vector<double> roots;
    if (neg > 0.0) roots = spectral::deformed_eigenvalues_via_det(dec, basis, d, lo - neg - 1.0, lo - gap);
    if (pos > 0.0) {
        const auto r = spectral::deformed_eigenvalues_via_det(dec, basis, d, hi + gap, hi + pos + 1.0);
        roots.insert(roots.end(), r.begin(), r.end());
    }

    OracleComparison out;
    std::vector<double> exterior;
    for (long a = 0; a < mu.size(); ++a) {
        if (mu(a) < lo - gap || mu(a) > hi + gap) exterior.push_back(mu(a));
        const auto it = std::lower_bound(lam.data(), lam.data() + n, mu(a));
        double nearest = std::numeric_limits<double>::infinity();
        if (it != lam.data() + n) nearest = std::min(nearest, *it - mu(a));
        if (it != lam.data()) nearest = std::min(nearest, mu(a) - *(it - 1));
        if (nearest < 1e-10) ++out.near_pole;
    }
    out.count_mismatch = std::abs(static_cast<long>(exterior.size()) - static_cast<long>(roots.size()));
    const std::size_t m = std::min(exterior.size(), roots.size());
    for (std::size_t j = 0; j < m; ++j) out.max_abs_diff = std::max(out.max_abs_diff, std::abs(exterior[j] - roots[j]));
    out.compared = static_cast<long>(m);
    return out;
}

std::vector<long> evenly_spaced(long count, long total) {
    std::vector<long> out;
    count = std::min(count, total);
    for (long j = 0; j < count; ++j) out.push_back(j * total / count);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Per-matrix statistics
// ---------------------------------------------------------------------------

std::vector<cplx> default_z_grid() {
    std::vector<cplx> grid;
    for (double e : {-1.5, -0.5, 0.3, 1.2, 1.8}) {
        for (double eta : {0.05, 0.2, 1.0}) grid.emplace_back(e, eta);
    }
    for (double e : {-2.5, 2.5, 3.0}) {
        for (double eta : {0.01, 0.1}) grid.emplace_back(e, eta);
    }
    return grid;
}

template <typename Scalar>
IsotropicStatistic isotropic_statistic(const SpectralDecomposition<Scalar>& dec,
                                       const std::vector<std::pair<Vector<Scalar>, Vector<Scalar>>>& pairs,
                                       const std::vector<cplx>& z_grid, double exterior_offset) {
    if (!dec.has_vectors()) throw std::invalid_argument("isotropic_statistic: eigenvectors required");
    const long n = dec.size();
    IsotropicStatistic out;
    for (const auto& [v, w] : pairs) {
        const Vector<Scalar> a = dec.eigenvectors.adjoint() * v;
        const Vector<Scalar> b = dec.eigenvectors.adjoint() * w;
        const cplx vw = cplx(v.dot(w));
        for (cplx z : z_grid) {
            const cplx g = spectral::resolvent_from_overlaps(dec.eigenvalues, a, b, z);
            const cplx m = theory::stieltjes(z);
            const double residual = std::abs(g - m * vw);
            const auto cp = theory::control_params(z, n);
            const bool exterior = std::abs(z.real()) >= 2.0 + exterior_offset;
            const double scale = exterior ? std::sqrt(m.imag() / (static_cast<double>(n) * z.imag())) : cp.psi_value;
            const double ratio = residual / scale;
            out.max_residual = std::max(out.max_residual, residual);
            out.max_ratio = std::max(out.max_ratio, ratio);
            (exterior ? out.exterior_max : out.interior_max) =
                std::max(exterior ? out.exterior_max : out.interior_max, ratio);
        }
    }
    return out;
}

double rigidity_statistic(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& classical) {
    const long n = eigenvalues.size();
    if (classical.size() != n) throw std::invalid_argument("rigidity_statistic: size mismatch");
    const double scale = std::pow(static_cast<double>(n), 2.0 / 3.0);
    double out = 0.0;
    for (long a = 1; a <= n; ++a) {
        const double hat = static_cast<double>(std::min(a, n + 1 - a));
        out = std::max(out, std::abs(eigenvalues(a - 1) - classical(a - 1)) * scale * std::cbrt(hat));
    }
    return out;
}

template <typename Scalar>
DelocalizationStatistic delocalization_statistic(const SpectralDecomposition<Scalar>& dec,
                                                 const Vector<Scalar>& v, long window) {
    if (!dec.has_vectors()) throw std::invalid_argument("delocalization_statistic: eigenvectors required");
    const long n = dec.size();
    const double nn = static_cast<double>(n);
    window = std::clamp<long>(window, 1, n);
    const Eigen::VectorXd p = (dec.eigenvectors.adjoint() * v).cwiseAbs2();

    DelocalizationStatistic out;
    out.sup_overlap = nn * p.maxCoeff();
    double sum = p.head(window).sum();
    double best = sum;
    for (long a = window; a < n; ++a) {
        sum += p(a) - p(a - window);
        best = std::max(best, sum);
    }
    out.window_average = nn * best / static_cast<double>(window);

    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> colsums = dec.eigenvectors.colwise().sum();
    for (long a = 0; a < n; ++a) {
        if (a < window || a >= n - window) out.edge_entry_sum = std::max(out.edge_entry_sum, std::abs(colsums(a)));
    }
    return out;
}

template <typename Scalar>
Vector<Scalar> recipe_vector(const std::string& recipe, long n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("vector recipe needs N >= 1");
    if (recipe == "uniform") return Vector<Scalar>::Constant(n, Scalar(1.0 / std::sqrt(static_cast<double>(n))));
    if (recipe == "standard") return unit_vector<Scalar>(n, 0);
    if (recipe == "spike_plus_flat") {
        if (n < 2) throw ConfigError("spike_plus_flat needs N >= 2");
        return ensembles::spike_plus_flat_vector(n).cast<Scalar>();
    }
    if (recipe == "random") {
        Rng rng(seed);
        return random_unit<Scalar>(n, rng);
    }
    throw ConfigError("unknown vector recipe '" + recipe + "' (uniform, standard, spike_plus_flat, random)");
}

// ---------------------------------------------------------------------------
// Resampling N^{1/2}<v, H v>
// ---------------------------------------------------------------------------

HvSampler::HvSampler(const EnsembleSpec& spec, const Eigen::VectorXcd& v) : spec_(spec), v_(v) {
    spec.validate();
    if (v.size() != spec.n) throw std::invalid_argument("HvSampler: dimension mismatch");
    const double cutoff = 1.0 / std::sqrt(static_cast<double>(spec.n));
    std::vector<long> idx(static_cast<std::size_t>(spec.n));
    std::iota(idx.begin(), idx.end(), 0L);
    std::stable_sort(idx.begin(), idx.end(), [&](long a, long b) { return std::norm(v(a)) > std::norm(v(b)); });
    constexpr std::size_t max_exact = 64;
    for (long i : idx) {
        if (exact_.size() >= max_exact || std::norm(v(i)) < cutoff) break;
        exact_.push_back(i);
    }
    std::sort(exact_.begin(), exact_.end());
    Eigen::VectorXcd restricted = Eigen::VectorXcd::Zero(spec.n);
    for (long i : exact_) restricted(i) = v(i);
    rest_variance_ = std::max(0.0, ensembles::hv_variance(spec, v) - ensembles::hv_variance(spec, restricted));
}

double HvSampler::operator()(Rng& rng) const {
    const ensembles::StandardLaw law{spec_.family, spec_.skew};
    // Scaled entries N^{1/2} h_ij, drawn in the same shape as sample_wigner.
    double exact = 0.0;
    for (std::size_t a = 0; a < exact_.size(); ++a) {
        const cplx vi = v_(exact_[a]);
        for (std::size_t b = 0; b < a; ++b) {
            const cplx vj = v_(exact_[b]);
            cplx h;
            if (spec_.beta == 1) {
                h = law.draw(rng);
            } else {
                const double re = law.draw(rng);
                h = cplx(re, law.draw(rng)) / std::sqrt(2.0);
            }
            exact += 2.0 * (std::conj(vj) * h * vi).real();
        }
        const double diag = spec_.beta == 1 ? std::sqrt(2.0) * law.draw(rng) : law.draw(rng);
        exact += diag * std::norm(vi);
    }
    std::normal_distribution<double> normal;
    return exact + std::sqrt(rest_variance_) * normal(rng);
}

// ---------------------------------------------------------------------------
// Isotropic law, rigidity, delocalization
// ---------------------------------------------------------------------------

ExperimentReport run_isotropic_law(const ExperimentConfig& cfg) {
    validate_common(cfg);
    const long n = cfg.ensemble.n;
    const std::vector<cplx> grid = cfg.isotropic.z_grid.empty() ? default_z_grid() : cfg.isotropic.z_grid;
    const theory::SemicircleModel model(cfg.sigma);
    for (cplx z : grid) {
        if (!model.in_window(z)) {
            throw ConfigError("spectral parameter " + format_number(z.real()) + "+" + format_number(z.imag()) +
                              "i lies outside |E| <= sigma, 0 < eta <= sigma");
        }
    }
    if (cfg.isotropic.vector_pairs < 0) throw ConfigError("vector pairs must be non-negative");
    if (cfg.isotropic.vector_pairs == 0 && !cfg.isotropic.standard_vectors) {
        throw ConfigError("no test vectors selected");
    }

    return with_scalar(cfg.ensemble.beta, [&]<typename Scalar>() {
        std::vector<std::pair<Vector<Scalar>, Vector<Scalar>>> pairs;
        Rng rng(stream_seed(cfg.master_seed, Stream::vectors, 0));
        for (int p = 0; p < cfg.isotropic.vector_pairs; ++p) {
            Vector<Scalar> v = random_unit<Scalar>(n, rng);
            Vector<Scalar> w = p % 2 == 0 ? v : random_unit<Scalar>(n, rng);
            pairs.emplace_back(std::move(v), std::move(w));
        }
        if (cfg.isotropic.standard_vectors) {
            pairs.emplace_back(unit_vector<Scalar>(n, 0), unit_vector<Scalar>(n, 0));
            if (n > 1) pairs.emplace_back(unit_vector<Scalar>(n, 0), unit_vector<Scalar>(n, 1));
        }

        const auto stats = run_trials<IsotropicStatistic>(cfg.trials, cfg.resolved_workers(), [&](long r) {
            const auto h = ensembles::sample_wigner<Scalar>(cfg.ensemble, trial_seed(cfg, r));
            return isotropic_statistic(spectral::eigh(h, EigenMode::with_vectors), pairs, grid,
                                       cfg.isotropic.exterior_offset);
        });

        ExperimentReport report;
        report.experiment = "isotropic";
        std::vector<double> ratio, interior, exterior;
        std::vector<char> ok;
        double max_residual = 0.0;
        for (const auto& s : stats) {
            ratio.push_back(s.max_ratio);
            interior.push_back(s.interior_max);
            exterior.push_back(s.exterior_max);
            ok.push_back(s.max_ratio <= cfg.bound_multiplier);
            max_residual = std::max(max_residual, s.max_residual);
        }
        const bool any_exterior = std::any_of(grid.begin(), grid.end(), [&](cplx z) {
            return std::abs(z.real()) >= 2.0 + cfg.isotropic.exterior_offset;
        });
        const bool any_interior = std::any_of(grid.begin(), grid.end(), [&](cplx z) {
            return std::abs(z.real()) < 2.0 + cfg.isotropic.exterior_offset;
        });
        report.series.push_back(make_series("max_ratio", std::move(ratio)));
        if (any_interior) report.series.push_back(make_series("interior_max", std::move(interior)));
        if (any_exterior) report.series.push_back(make_series("exterior_max", std::move(exterior)));
        report.pass_fraction = fraction_true(ok);
        report.add_check("pass_fraction", report.pass_fraction, ">=", cfg.pass_fraction);
        report.metrics["max_residual"] = max_residual;
        report.metrics["grid_points"] = static_cast<double>(grid.size());
        report.metrics["vector_pairs"] = static_cast<double>(pairs.size());
        return report;
    });
}

ExperimentReport run_rigidity(const ExperimentConfig& cfg) {
    validate_common(cfg);
    const Eigen::VectorXd classical = theory::classical_locations(cfg.ensemble.n);
    return with_scalar(cfg.ensemble.beta, [&]<typename Scalar>() {
        const auto stats = run_trials<double>(cfg.trials, cfg.resolved_workers(), [&](long r) {
            const auto h = ensembles::sample_wigner<Scalar>(cfg.ensemble, trial_seed(cfg, r));
            return rigidity_statistic(spectral::eigh(h, EigenMode::values_only).eigenvalues, classical);
        });
        ExperimentReport report;
        report.experiment = "rigidity";
        std::vector<char> ok;
        for (double s : stats) ok.push_back(s <= cfg.bound_multiplier);
        report.series.push_back(make_series("rigidity", stats));
        report.pass_fraction = fraction_true(ok);
        report.add_check("pass_fraction", report.pass_fraction, ">=", cfg.pass_fraction);
        return report;
    });
}

ExperimentReport run_delocalization(const ExperimentConfig& cfg, const std::string& v_recipe) {
    validate_common(cfg);
    const long n = cfg.ensemble.n;
    const long window = std::min(cfg.resolved_window(), n);
    const bool vanishing = cfg.ensemble.third_moments_vanish();
    // The supremum of N χ²-like overlaps grows like 2 log N even for Gaussian
    // ensembles, so the sup form carries an explicit log N factor.
    const double sup_bound = cfg.bound_multiplier * std::log(static_cast<double>(std::max<long>(n, 3)));
    const double b = cfg.bound_multiplier;

    return with_scalar(cfg.ensemble.beta, [&]<typename Scalar>() {
        const Vector<Scalar> v =
            recipe_vector<Scalar>(v_recipe, n, stream_seed(cfg.master_seed, Stream::vectors, 0));
        const auto stats = run_trials<DelocalizationStatistic>(cfg.trials, cfg.resolved_workers(), [&](long r) {
            const auto h = ensembles::sample_wigner<Scalar>(cfg.ensemble, trial_seed(cfg, r));
            return delocalization_statistic(spectral::eigh(h, EigenMode::with_vectors), v, window);
        });

        ExperimentReport report;
        report.experiment = "deloc";
        std::vector<double> sup, avg, edge;
        std::vector<char> ok, edge_ok;
        for (const auto& s : stats) {
            sup.push_back(s.sup_overlap);
            avg.push_back(s.window_average);
            edge.push_back(s.edge_entry_sum);
            ok.push_back(vanishing ? s.sup_overlap <= sup_bound : s.window_average <= b);
            edge_ok.push_back(s.edge_entry_sum <= b);
        }
        Series sup_s = make_series("sup_overlap", std::move(sup));
        Series avg_s = make_series("window_average", std::move(avg));
        if (vanishing) {
            report.series.push_back(std::move(sup_s));
            report.series.push_back(std::move(avg_s));
        } else {
            report.series.push_back(std::move(avg_s));
            report.series.push_back(std::move(sup_s));
        }
        report.series.push_back(make_series("edge_entry_sum", std::move(edge)));
        report.pass_fraction = fraction_true(ok);
        report.add_check("pass_fraction", report.pass_fraction, ">=", cfg.pass_fraction);
        report.add_check("edge_entry_sum_pass_fraction", fraction_true(edge_ok), ">=", cfg.pass_fraction);
        report.metrics["window"] = static_cast<double>(window);
        report.metrics["primary_bound"] = vanishing ? sup_bound : b;
        return report;
    });
}

// ---------------------------------------------------------------------------
// Outliers
// ---------------------------------------------------------------------------

namespace {

struct OutlierTrial {
    std::vector<double> x;
    std::vector<double> mu;
    double interlacing = 0.0;
    std::optional<OracleComparison> oracle;
};

struct Prediction {
    long index;  ///< position in d
    long alpha;  ///< zero-based eigenvalue index
    double d;
    theory::OutlierLaw law;
    double hv_variance;
    double mean;      ///< of the normalized statistic
    double variance;  ///< of the normalized statistic
    Eigen::VectorXcd v;
};

ExperimentReport run_outliers(const ExperimentConfig& cfg, bool distribution) {
    validate_common(cfg);
    const auto& def = require_deformation(cfg);
    const long n = cfg.ensemble.n;
    const auto outliers = def.outlier_indices();
    if (outliers.empty()) throw ConfigError(cfg.experiment + ": no d_i with |d_i| > 1 to track");
    if (distribution && cfg.trials < cfg.outlier.min_trials) {
        throw ConfigError("outlier distribution needs at least " + std::to_string(cfg.outlier.min_trials) +
                          " trials");
    }

    return with_scalar(cfg.ensemble.beta, [&]<typename Scalar>() {
        const Matrix<Scalar> basis = ensembles::build_basis<Scalar>(
            def.recipe, n, def.k(), stream_seed(cfg.master_seed, Stream::basis, 0), def.explicit_basis);

        const auto moments = ensembles::moment_matrices_of(cfg.ensemble);
        std::vector<Prediction> pred;
        for (long i : outliers) {
            Prediction p;
            p.index = i;
            p.alpha = def.outlier_eigen_index(i, n);
            p.d = def.d[static_cast<std::size_t>(i)];
            p.v = basis.col(i).template cast<cplx>();
            p.law = theory::outlier_law(p.d, p.v, moments, cfg.ensemble.beta);
            p.hv_variance = ensembles::hv_variance(cfg.ensemble, p.v);
            p.mean = p.law.mean();
            p.variance = p.law.total_variance(p.hv_variance);
            pred.push_back(std::move(p));
        }

        const auto oracle_trials = evenly_spaced(cfg.outlier.oracle_checks, cfg.trials);
        const auto trials = run_trials<OutlierTrial>(cfg.trials, cfg.resolved_workers(), [&](long r) {
            const auto h = ensembles::sample_wigner<Scalar>(cfg.ensemble, trial_seed(cfg, r));
            const auto ht = ensembles::deform(h, def.d, basis);
            const Eigen::VectorXd mu = spectral::eigh(ht, EigenMode::values_only).eigenvalues;
            OutlierTrial t;
            for (const auto& p : pred) {
                const double m = mu(p.alpha);
                t.mu.push_back(m);
                t.x.push_back(std::sqrt(static_cast<double>(n) / (std::abs(p.d) - 1.0)) * (m - theory::theta(p.d)));
            }
            const bool oracle = std::binary_search(oracle_trials.begin(), oracle_trials.end(), r);
            if (oracle || cfg.outlier.interlacing_check) {
                const auto dec = spectral::eigh(h, oracle ? EigenMode::with_vectors : EigenMode::values_only);
                t.interlacing =
                    spectral::interlacing_violation(dec.eigenvalues, mu, def.n_positive(), def.n_negative());
                if (oracle) t.oracle = compare_with_det(dec, basis, def.d, mu, cfg.outlier.oracle_gap);
            }
            return t;
        });

        ExperimentReport report;
        report.experiment = distribution ? "outlier-dist" : "outlier-loc";
        report.warnings = deformation_warnings(cfg);
        const double b = cfg.bound_multiplier;
        const double nn = static_cast<double>(n);

        std::vector<char> ok(static_cast<std::size_t>(cfg.trials), 1);
        for (std::size_t j = 0; j < pred.size(); ++j) {
            const auto& p = pred[j];
            const std::string label = std::to_string(p.index + 1);
            std::vector<double> x, mu;
            for (std::size_t r = 0; r < trials.size(); ++r) {
                x.push_back(trials[r].x[j]);
                mu.push_back(trials[r].mu[j]);
                if (!(std::abs(trials[r].x[j]) <= b)) ok[r] = 0;
            }

            std::optional<stats::Reference> reference = stats::NormalLaw{p.mean, p.variance};
            std::vector<double> draws;
            if (distribution) {
                const HvSampler hv(cfg.ensemble, p.v);
                Rng rng(stream_seed(cfg.master_seed, Stream::reference, static_cast<std::uint64_t>(p.index)));
                std::normal_distribution<double> normal;
                draws.reserve(static_cast<std::size_t>(cfg.outlier.reference_draws));
                for (long s = 0; s < cfg.outlier.reference_draws; ++s) {
                    const double hv_sample = hv(rng);
                    draws.push_back(theory::sample_predicted_outlier(p.law, hv_sample, normal(rng)));
                }
                report.add_check("ks_one_sample_" + label, stats::ks_distance(x, stats::NormalLaw{p.mean, p.variance}),
                                 "<=", cfg.outlier.ks_one_sample);
                report.add_check("ks_two_sample_" + label, stats::ks_two_sample(x, draws), "<=",
                                 cfg.outlier.ks_two_sample);
                report.metrics["reference_mean_" + label] = stats::summarize(draws).mean;
                report.metrics["reference_variance_" + label] = stats::summarize(draws).variance;
                reference = std::move(draws);
            }

            Series xs = make_series("outlier_" + label, std::move(x), reference);
            Series ms = make_series("mu_" + label, std::move(mu));
            const double scale = std::sqrt((std::abs(p.d) - 1.0) / nn);
            const double mu_mean = theory::theta(p.d) + p.mean * scale;
            const double mu_var = p.variance * scale * scale;
            if (cfg.trials > 1) {
                report.add_check("mean_band_" + label, std::abs(ms.summary.mean - mu_mean) / ms.summary.std_error,
                                 "<=", cfg.outlier.mean_band_se);
                report.add_check("variance_band_" + label, std::abs(ms.summary.variance / mu_var - 1.0), "<=",
                                 cfg.outlier.variance_rel_tol);
            }
            report.metrics["theta_" + label] = theory::theta(p.d);
            report.metrics["predicted_mean_" + label] = p.mean;
            report.metrics["predicted_variance_" + label] = p.variance;
            report.metrics["predicted_mu_mean_" + label] = mu_mean;
            report.metrics["predicted_mu_variance_" + label] = mu_var;
            report.metrics["q_" + label] = p.law.functionals.q;
            report.metrics["r_" + label] = p.law.functionals.r;
            report.metrics["s_" + label] = p.law.functionals.s;
            report.series.push_back(std::move(xs));
            report.series.push_back(std::move(ms));
        }
        // Primary series first, raw eigenvalues after.
        std::stable_partition(report.series.begin(), report.series.end(),
                              [](const Series& s) { return s.name.rfind("outlier_", 0) == 0; });

        report.pass_fraction = fraction_true(ok);
        report.add_check("pass_fraction", report.pass_fraction, ">=", cfg.pass_fraction);

        double interlacing = 0.0;
        OracleComparison oracle;
        long oracle_runs = 0;
        for (const auto& t : trials) {
            interlacing = std::max(interlacing, t.interlacing);
            if (t.oracle) {
                ++oracle_runs;
                oracle.max_abs_diff = std::max(oracle.max_abs_diff, t.oracle->max_abs_diff);
                oracle.count_mismatch += t.oracle->count_mismatch;
                oracle.near_pole += t.oracle->near_pole;
            }
        }
        if (cfg.outlier.interlacing_check || oracle_runs > 0) {
            report.metrics["interlacing_max_violation"] = interlacing;
            report.add_check("interlacing", interlacing, "<=", 1e-9);
        }
        if (oracle_runs > 0) {
            report.metrics["oracle_trials"] = static_cast<double>(oracle_runs);
            report.metrics["oracle_max_abs_diff"] = oracle.max_abs_diff;
            report.metrics["oracle_near_pole"] = static_cast<double>(oracle.near_pole);
            report.add_check("oracle_max_abs_diff", oracle.max_abs_diff, "<=", cfg.oracle_tolerance);
            report.add_check("oracle_count_mismatch", static_cast<double>(oracle.count_mismatch), "<=", 0.0);
            if (oracle.near_pole > 0) {
                report.warnings.push_back(std::to_string(oracle.near_pole) +
                                          " deformed eigenvalues within 1e-10 of an eigenvalue of H");
            }
        }
        return report;
    });
}

}  // namespace

ExperimentReport run_outlier_location(const ExperimentConfig& cfg) { return run_outliers(cfg, false); }

ExperimentReport run_outlier_distribution(const ExperimentConfig& cfg) { return run_outliers(cfg, true); }

// ---------------------------------------------------------------------------
// Sticking
// ---------------------------------------------------------------------------

namespace {

struct StickingTrial {
    double top = 0.0;
    double bottom = 0.0;
    double rank_one_gap = 0.0;
    double rank_one_scaled = 0.0;
    double interlacing = 0.0;
};

}  // namespace

ExperimentReport run_sticking(const ExperimentConfig& cfg) {
    validate_common(cfg);
    const auto& def = require_deformation(cfg);
    const long n = cfg.ensemble.n;
    const long window = std::min(cfg.resolved_window(), n);
    const long kp = def.k_plus();
    const long km = def.k_minus();
    const double n23 = std::pow(static_cast<double>(n), 2.0 / 3.0);
    const bool rank_one_bulk = def.k() == 1 && std::abs(def.d[0]) < 1.0;

    return with_scalar(cfg.ensemble.beta, [&]<typename Scalar>() {
        const Matrix<Scalar> basis = ensembles::build_basis<Scalar>(
            def.recipe, n, def.k(), stream_seed(cfg.master_seed, Stream::basis, 0), def.explicit_basis);
        const auto trials = run_trials<StickingTrial>(cfg.trials, cfg.resolved_workers(), [&](long r) {
            const auto h = ensembles::sample_wigner<Scalar>(cfg.ensemble, trial_seed(cfg, r));
            const Eigen::VectorXd lam = spectral::eigh(h, EigenMode::values_only).eigenvalues;
            const Eigen::VectorXd mu =
                spectral::eigh(ensembles::deform(h, def.d, basis), EigenMode::values_only).eigenvalues;
            StickingTrial t;
            // One-based α in [N - window, N - k⁺] pairs with λ_{α+k⁺}.
            for (long a = std::max<long>(1, n - window); a <= n - kp; ++a) {
                t.top = std::max(t.top, n23 * std::abs(mu(a - 1) - lam(a + kp - 1)));
            }
            // One-based α in [k⁻ + 1, window] pairs with λ_{α-k⁻}.
            for (long a = km + 1; a <= std::min(window, n); ++a) {
                t.bottom = std::max(t.bottom, n23 * std::abs(mu(a - 1) - lam(a - km - 1)));
            }
            if (rank_one_bulk) {
                const double d = std::abs(def.d[0]);
                t.rank_one_gap = def.d[0] > 0 ? mu(n - 1) - lam(n - 1) : lam(0) - mu(0);
                t.rank_one_scaled = t.rank_one_gap * static_cast<double>(n) * (1.0 - d + std::cbrt(1.0 / n)) / d;
            }
            t.interlacing = spectral::interlacing_violation(lam, mu, def.n_positive(), def.n_negative());
            return t;
        });

        ExperimentReport report;
        report.experiment = "sticking";
        report.warnings = deformation_warnings(cfg);
        const double b = cfg.bound_multiplier;
        std::vector<double> worst, top, bottom, gap, scaled;
        std::vector<char> ok;
        double interlacing = 0.0;
        for (const auto& t : trials) {
            worst.push_back(std::max(t.top, t.bottom));
            top.push_back(t.top);
            bottom.push_back(t.bottom);
            gap.push_back(t.rank_one_gap);
            scaled.push_back(t.rank_one_scaled);
            ok.push_back(worst.back() <= b && (!rank_one_bulk || t.rank_one_scaled <= b));
            interlacing = std::max(interlacing, t.interlacing);
        }
        report.series.push_back(make_series("sticking_max", std::move(worst)));
        report.series.push_back(make_series("top_window", std::move(top)));
        report.series.push_back(make_series("bottom_window", std::move(bottom)));
        if (rank_one_bulk) {
            const double min_gap = *std::min_element(gap.begin(), gap.end());
            report.series.push_back(make_series("rank_one_scaled", std::move(scaled)));
            report.series.push_back(make_series("rank_one_gap", std::move(gap)));
            report.add_check("rank_one_min_gap", min_gap, ">=", -1e-12);
        }
        report.pass_fraction = fraction_true(ok);
        report.add_check("pass_fraction", report.pass_fraction, ">=", cfg.pass_fraction);
        report.metrics["window"] = static_cast<double>(window);
        report.metrics["interlacing_max_violation"] = interlacing;
        report.add_check("interlacing", interlacing, "<=", 1e-9);
        return report;
    });
}

// ---------------------------------------------------------------------------
// Transition scan
// ---------------------------------------------------------------------------

ExperimentReport run_bbp_scan(const ExperimentConfig& cfg, const std::vector<double>& w_grid) {
    validate_common(cfg);
    const long n = cfg.ensemble.n;
    if (w_grid.empty()) throw ConfigError("bbp-scan: empty w grid");
    const double n13 = std::cbrt(static_cast<double>(n));
    const double n23 = n13 * n13;
    std::vector<double> ds;
    for (double w : w_grid) {
        if (!std::isfinite(w)) throw ConfigError("bbp-scan: w must be finite");
        const double d = 1.0 + w / n13;
        if (d == 0.0) throw ConfigError("bbp-scan: w = " + format_number(w) + " gives d = 0");
        ds.push_back(d);
    }
    const auto recipe = cfg.deformation ? cfg.deformation->recipe : ensembles::BasisRecipe::uniform_vector;
    if (recipe == ensembles::BasisRecipe::explicit_basis) throw ConfigError("bbp-scan: explicit basis unsupported");
    const std::size_t m = w_grid.size();

    return with_scalar(cfg.ensemble.beta, [&]<typename Scalar>() {
        const Matrix<Scalar> basis =
            ensembles::build_basis<Scalar>(recipe, n, 1, stream_seed(cfg.master_seed, Stream::basis, 0));
        // Per trial: edge values then sticking values, one per w.
        const auto trials = run_trials<std::vector<double>>(cfg.trials, cfg.resolved_workers(), [&](long r) {
            const auto h = ensembles::sample_wigner<Scalar>(cfg.ensemble, trial_seed(cfg, r));
            const double lam_max = spectral::eigh(h, EigenMode::values_only).eigenvalues(n - 1);
            std::vector<double> out(2 * m);
            for (std::size_t j = 0; j < m; ++j) {
                const Eigen::VectorXd mu =
                    spectral::eigh(ensembles::deform(h, {ds[j]}, basis), EigenMode::values_only).eigenvalues;
                out[j] = n23 * (mu(n - 1) - 2.0);
                out[m + j] = n23 * (mu(n - 1) - lam_max);
            }
            return out;
        });

        ExperimentReport report;
        report.experiment = "bbp-scan";
        const double b = cfg.bound_multiplier;
        std::vector<char> ok(trials.size(), 1);
        std::vector<Series> stick_series;
        for (std::size_t j = 0; j < m; ++j) {
            const double w = w_grid[j];
            const std::string tag = "w=" + format_number(w);
            std::vector<double> edge, stick, abs_stick;
            for (std::size_t r = 0; r < trials.size(); ++r) {
                edge.push_back(trials[r][j]);
                stick.push_back(trials[r][m + j]);
                abs_stick.push_back(std::abs(stick.back()));
            }
            const bool sub = w <= cfg.bbp.sub_w_max;
            if (sub) {
                for (std::size_t r = 0; r < trials.size(); ++r) {
                    if (!(abs_stick[r] <= b)) ok[r] = 0;
                }
            }
            Series es = make_series("edge_" + tag, std::move(edge));
            Series ss = make_series("stick_" + tag, std::move(stick));
            const double abs_mean = stats::summarize(abs_stick).mean;
            report.metrics["d_" + tag] = ds[j];
            report.metrics["mean_edge_" + tag] = es.summary.mean;
            report.metrics["mean_stick_" + tag] = ss.summary.mean;
            report.metrics["mean_abs_stick_" + tag] = abs_mean;
            if (w >= cfg.bbp.super_w_min) {
                const double w2 = w * w;
                report.add_check("edge_vs_w2_" + tag, std::abs(es.summary.mean - w2) / w2, "<=",
                                 cfg.bbp.edge_rel_tol);
                // Exact classical location; informational only.
                const double exact = n23 * (theory::theta(ds[j]) - 2.0);
                report.metrics["theta_edge_" + tag] = exact;
                report.add_check("edge_vs_theta_" + tag, std::abs(es.summary.mean - exact) / exact, "<=",
                                 cfg.bbp.edge_rel_tol, false);
            }
            if (sub) report.add_check("sticking_band_" + tag, abs_mean, "<=", cfg.bbp.sticking_band);
            if (std::abs(ds[j]) > cfg.sigma - 1.0) {
                report.warnings.push_back(tag + " gives |d| > sigma - 1");
            }
            report.series.push_back(std::move(es));
            stick_series.push_back(std::move(ss));
        }
        for (auto& s : stick_series) report.series.push_back(std::move(s));
        report.pass_fraction = fraction_true(ok);
        report.add_check("pass_fraction", report.pass_fraction, ">=", cfg.pass_fraction);
        return report;
    });
}

// ---------------------------------------------------------------------------
// Oracle check
// ---------------------------------------------------------------------------

ExperimentReport run_oracle_check(const ExperimentConfig& cfg) {
    validate_common(cfg);
    const auto& def = require_deformation(cfg);
    const long n = cfg.ensemble.n;

    return with_scalar(cfg.ensemble.beta, [&]<typename Scalar>() {
        struct Trial {
            OracleComparison cmp;
            double interlacing = 0.0;
        };
        const auto trials = run_trials<Trial>(cfg.trials, cfg.resolved_workers(), [&](long r) {
            const auto h = ensembles::sample_wigner<Scalar>(cfg.ensemble, trial_seed(cfg, r));
            const Matrix<Scalar> basis =
                ensembles::build_basis<Scalar>(def.recipe, n, def.k(),
                                               stream_seed(cfg.master_seed, Stream::basis, static_cast<std::uint64_t>(r)),
                                               def.explicit_basis);
            const auto dec = spectral::eigh(h, EigenMode::with_vectors);
            const Eigen::VectorXd mu =
                spectral::eigh(ensembles::deform(h, def.d, basis), EigenMode::values_only).eigenvalues;
            Trial t;
            t.cmp = compare_with_det(dec, basis, def.d, mu, cfg.outlier.oracle_gap);
            t.interlacing = spectral::interlacing_violation(dec.eigenvalues, mu, def.n_positive(), def.n_negative());
            return t;
        });

        ExperimentReport report;
        report.experiment = "oracle-check";
        std::vector<double> diffs, inter;
        std::vector<char> ok;
        long mismatch = 0;
        long near_pole = 0;
        long compared = 0;
        for (const auto& t : trials) {
            diffs.push_back(t.cmp.max_abs_diff);
            inter.push_back(t.interlacing);
            ok.push_back(t.cmp.max_abs_diff <= cfg.oracle_tolerance && t.cmp.count_mismatch == 0);
            mismatch += t.cmp.count_mismatch;
            near_pole += t.cmp.near_pole;
            compared += t.cmp.compared;
        }
        const double worst = *std::max_element(diffs.begin(), diffs.end());
        const double worst_inter = *std::max_element(inter.begin(), inter.end());
        report.series.push_back(make_series("oracle_abs_diff", std::move(diffs)));
        report.series.push_back(make_series("interlacing_violation", std::move(inter)));
        report.pass_fraction = fraction_true(ok);
        report.metrics["oracle_max_abs_diff"] = worst;
        report.metrics["exterior_eigenvalues_compared"] = static_cast<double>(compared);
        report.metrics["oracle_near_pole"] = static_cast<double>(near_pole);
        report.metrics["interlacing_max_violation"] = worst_inter;
        report.add_check("oracle_max_abs_diff", worst, "<=", cfg.oracle_tolerance);
        report.add_check("oracle_count_mismatch", static_cast<double>(mismatch), "<=", 0.0);
        report.add_check("interlacing", worst_inter, "<=", 1e-9);
        if (near_pole > 0) {
            report.warnings.push_back(std::to_string(near_pole) +
                                      " deformed eigenvalues within 1e-10 of an eigenvalue of H");
        }
        return report;
    });
}

// ---------------------------------------------------------------------------
// Scaling and dispatch
// ---------------------------------------------------------------------------

void attach_scaling(ExperimentReport& report, const ScalingResult& scaling, double ratio_limit) {
    for (std::size_t j = 0; j < scaling.sizes.size(); ++j) {
        report.metrics["scaling_median_N=" + std::to_string(scaling.sizes[j])] = scaling.medians[j];
    }
    for (std::size_t j = 0; j < scaling.ratios.size(); ++j) {
        report.metrics["scaling_ratio_N=" + std::to_string(scaling.sizes[j + 1])] = scaling.ratios[j];
    }
    if (!scaling.ratios.empty()) {
        report.add_check("scaling_max_successive_ratio", scaling.max_ratio, "<=", ratio_limit);
    }
}

ExperimentReport run_named(const ExperimentConfig& cfg) {
    const std::string& name = cfg.experiment;
    std::function<ExperimentReport(const ExperimentConfig&)> runner;
    if (name == "isotropic") {
        runner = run_isotropic_law;
    } else if (name == "rigidity") {
        runner = run_rigidity;
    } else if (name == "deloc") {
        runner = [](const ExperimentConfig& c) { return run_delocalization(c, c.vector_recipe); };
    } else if (name == "outlier-loc") {
        runner = run_outlier_location;
    } else if (name == "outlier-dist") {
        runner = run_outlier_distribution;
    } else if (name == "sticking") {
        runner = run_sticking;
    } else if (name == "bbp-scan") {
        runner = [](const ExperimentConfig& c) {
            std::vector<double> grid = c.bbp.w_grid;
            if (grid.empty()) grid = {-20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0};
            return run_bbp_scan(c, grid);
        };
    } else if (name == "oracle-check") {
        runner = run_oracle_check;
    } else {
        throw ConfigError("unknown experiment '" + name + "'");
    }

    ExperimentReport report = runner(cfg);
    if (!cfg.scaling_sizes.empty()) {
        for (long s : cfg.scaling_sizes) {
            if (s < 2) throw ConfigError("scaling sizes must be at least 2");
        }
        attach_scaling(report, run_scaling(cfg, cfg.scaling_sizes, runner), cfg.scaling_ratio_limit);
    }
    return report;
}

#define WIGNER_EXPERIMENTS_INSTANTIATE(S)                                                                   \
    template IsotropicStatistic isotropic_statistic<S>(                                                     \
        const SpectralDecomposition<S>&, const std::vector<std::pair<Vector<S>, Vector<S>>>&,               \
        const std::vector<cplx>&, double);                                                                  \
    template DelocalizationStatistic delocalization_statistic<S>(const SpectralDecomposition<S>&,          \
                                                                 const Vector<S>&, long);                   \
    template Vector<S> recipe_vector<S>(const std::string&, long, std::uint64_t);

WIGNER_EXPERIMENTS_INSTANTIATE(double)
WIGNER_EXPERIMENTS_INSTANTIATE(cplx)
#undef WIGNER_EXPERIMENTS_INSTANTIATE

}  // namespace wigner::experiments
