#include "wigner/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wigner::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double NormalLaw::cdf(double x) const { return normal_cdf((x - mean) / std::sqrt(variance)); }

double UniformLaw::cdf(double x) const {
    if (x <= lower) return 0.0;
    if (x >= upper) return 1.0;
    return (x - lower) / (upper - lower);
}

std::string describe(const Reference& reference) {
    std::ostringstream os;
    os.precision(17);
    if (const auto* n = std::get_if<NormalLaw>(&reference)) {
        os << "normal(mean=" << n->mean << ",variance=" << n->variance << ")";
    } else if (const auto* u = std::get_if<UniformLaw>(&reference)) {
        os << "uniform(" << u->lower << "," << u->upper << ")";
    } else {
        os << "empirical(n=" << std::get<std::vector<double>>(reference).size() << ")";
    }
    return os.str();
}

double ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= t) ++i;
        while (j < y.size() && y[j] <= t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

double ks_distance(std::span<const double> samples, const Reference& reference) {
    if (const auto* n = std::get_if<NormalLaw>(&reference)) {
        return ks_one_sample(samples, [n](double x) { return n->cdf(x); });
    }
    if (const auto* u = std::get_if<UniformLaw>(&reference)) {
        return ks_one_sample(samples, [u](double x) { return u->cdf(x); });
    }
    return ks_two_sample(samples, std::get<std::vector<double>>(reference));
}

Summary summarize(std::span<const double> samples, const std::optional<Reference>& reference) {
    if (samples.empty()) throw std::invalid_argument("summarize: empty sample");
    Summary s;
    s.count = static_cast<long>(samples.size());
    const double n = static_cast<double>(samples.size());

    double sum = 0.0;
    for (double x : samples) sum += x;
    s.mean = sum / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.variance = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
    s.std_error = std::sqrt(s.variance / n);

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();

    s.ecdf_x.resize(ecdf_points);
    s.ecdf_y.resize(ecdf_points);
    for (int j = 0; j < ecdf_points; ++j) {
        const double x = j + 1 == ecdf_points
                             ? s.max
                             : s.min + (s.max - s.min) * static_cast<double>(j) / (ecdf_points - 1);
        const auto count = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
        s.ecdf_x[j] = x;
        s.ecdf_y[j] = static_cast<double>(count) / n;
    }

    if (reference) {
        s.ks_distance = ks_distance(samples, *reference);
        s.reference = describe(*reference);
    }
    return s;
}

double median(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("median: empty sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const std::size_t h = x.size() / 2;
    return x.size() % 2 == 1 ? x[h] : 0.5 * (x[h - 1] + x[h]);
}

}  // namespace wigner::stats
