#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wigner::stats {

inline constexpr int ecdf_points = 512;

double normal_cdf(double x);

struct NormalLaw {
    double mean = 0.0;
    double variance = 1.0;
    double cdf(double x) const;
};

struct UniformLaw {
    double lower = 0.0;
    double upper = 1.0;
    double cdf(double x) const;
};

/// Reference law for a KS comparison: a closed-form CDF or an empirical sample.
using Reference = std::variant<NormalLaw, UniformLaw, std::vector<double>>;

std::string describe(const Reference& reference);

struct Summary {
    long count = 0;
    double mean = 0.0;
    double variance = 0.0;  ///< unbiased
    double std_error = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<double> ecdf_x;
    std::vector<double> ecdf_y;
    std::optional<double> ks_distance;
    std::string reference;
};

/// Moments, a 512-point ECDF on [min, max] and, when a reference is given, the
/// exact one-sample (closed-form reference) or two-sample (empirical) KS distance.
Summary summarize(std::span<const double> samples, const std::optional<Reference>& reference = std::nullopt);

double ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);
double ks_two_sample(std::span<const double> a, std::span<const double> b);
double ks_distance(std::span<const double> samples, const Reference& reference);

double median(std::span<const double> samples);

}  // namespace wigner::stats
