#include "wigner/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wigner::theory {

namespace {
constexpr double pi = std::numbers::pi;
}

double semicircle_density(double xi) {
    const double s = 4.0 - xi * xi;
    return s > 0.0 ? std::sqrt(s) / (2.0 * pi) : 0.0;
}

double semicircle_cdf(double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + (x * std::sqrt(4.0 - x * x) + 4.0 * std::asin(0.5 * x)) / (4.0 * pi);
}

double stieltjes(double x) {
    if (!(std::abs(x) > 2.0)) {
        throw DomainError("stieltjes: real argument must satisfy |x| > 2, got " + std::to_string(x));
    }
    // Of the two real roots of m² + xm + 1 = 0 this is the one in [-1, 1],
    // written without cancellation.
    return -2.0 / (x + std::copysign(std::sqrt(x * x - 4.0), x));
}

cplx stieltjes(cplx z) {
    if (z.imag() == 0.0) return stieltjes(z.real());
    if (z.imag() < 0.0) return std::conj(stieltjes(std::conj(z)));

    const cplx root = std::sqrt(z * z - 4.0);
    // The roots multiply to 1; take the large one without cancellation and
    // invert it to get the small one.
    const cplx plus = -z + root;
    const cplx minus = -z - root;
    const cplx large = 0.5 * (std::abs(plus) >= std::abs(minus) ? plus : minus);
    const cplx small = 1.0 / large;
    return small.imag() > 0.0 ? small : large;
}

double stieltjes_derivative(double x) {
    const double m = stieltjes(x);
    return m * m / (1.0 - m * m);
}

double kappa(double energy) { return std::abs(std::abs(energy) - 2.0); }

double theta(double d) {
    if (!(std::abs(d) >= 1.0)) {
        throw DomainError("theta: requires |d| >= 1, got " + std::to_string(d));
    }
    return d + 1.0 / d;
}

Eigen::VectorXd classical_locations(long n) {
    if (n < 1) throw std::invalid_argument("classical_locations: N must be positive");
    Eigen::VectorXd gamma(n);
    const double nn = static_cast<double>(n);
    for (long alpha = 1; alpha < n; ++alpha) {
        const double target = static_cast<double>(alpha);
        double lo = -2.0;
        double hi = 2.0;
        // Bisect until the bracket stops shrinking in floating point.
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (nn * semicircle_cdf(mid) < target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        const double r_lo = std::abs(nn * semicircle_cdf(lo) - target);
        const double r_hi = std::abs(nn * semicircle_cdf(hi) - target);
        gamma(alpha - 1) = r_lo < r_hi ? lo : hi;
    }
    gamma(n - 1) = 2.0;
    return gamma;
}

ControlParams control_params(cplx z, long n) {
    if (!(z.imag() > 0.0)) throw DomainError("control_params: requires Im z > 0");
    if (n < 1) throw std::invalid_argument("control_params: N must be positive");
    const double n_eta = static_cast<double>(n) * z.imag();
    const double im_m = stieltjes(z).imag();
    ControlParams p;
    p.n = n;
    p.z = z;
    p.psi_value = std::sqrt(im_m / n_eta) + 1.0 / n_eta;
    p.phi_value = im_m + 1.0 / n_eta;
    return p;
}

SemicircleModel::SemicircleModel(double sigma) : sigma_(sigma) {
    if (!(sigma >= 3.0)) throw std::invalid_argument("SemicircleModel: Σ must be >= 3");
}

bool SemicircleModel::in_window(cplx z, double lower_eta) const {
    return std::abs(z.real()) <= sigma_ && z.imag() >= lower_eta && z.imag() > 0.0 &&
           z.imag() <= sigma_;
}

MomentMatrices MomentMatrices::uniform(long n, cplx m3_offdiag, double m3_diag, double m4_offdiag,
                                       double m4_diag) {
    MomentMatrices mm;
    mm.m3.resize(n, n);
    mm.m4 = Eigen::MatrixXd::Constant(n, n, m4_offdiag);
    for (long j = 0; j < n; ++j) {
        for (long i = 0; i < j; ++i) {
            mm.m3(i, j) = m3_offdiag;
            mm.m3(j, i) = std::conj(m3_offdiag);
        }
        mm.m3(j, j) = m3_diag;
        mm.m4(j, j) = m4_diag;
    }
    return mm;
}

MomentMatrices MomentMatrices::gaussian(long n, int beta) {
    if (beta != 1 && beta != 2) throw std::invalid_argument("beta must be 1 or 2");
    const double b = beta;
    return uniform(n, 0.0, 0.0, 4.0 - b, (4.0 - b) + (17.0 - 8.0 * b));
}

MomentFunctionals moment_functionals(const MomentMatrices& moments, const Eigen::VectorXcd& v,
                                     int beta) {
    const long n = moments.size();
    if (v.size() != n || moments.m3.rows() != n || moments.m3.cols() != n ||
        moments.m4.cols() != n) {
        throw std::invalid_argument("moment_functionals: dimension mismatch");
    }
    if (std::abs(v.norm() - 1.0) > 1e-10) {
        throw std::invalid_argument("moment_functionals: v must be a unit vector");
    }
    if (beta != 1 && beta != 2) throw std::invalid_argument("beta must be 1 or 2");

    const double nn = static_cast<double>(n);
    const Eigen::VectorXd abs2 = v.cwiseAbs2();
    const Eigen::VectorXcd weighted = abs2.cast<cplx>().cwiseProduct(v);  // |v_i|² v_i
    const Eigen::VectorXcd m3v = moments.m3 * v;
    const Eigen::VectorXcd m3w = moments.m3 * weighted;

    MomentFunctionals f;
    // Σ_ij conj(v_i) M3_ij (|v_i|² + |v_j|²) v_j = w^* M3 v + v^* M3 w.
    f.q = (weighted.dot(m3v) + v.dot(m3w)).real() / (2.0 * std::sqrt(nn));
    const Eigen::RowVectorXd column_sums =
        (moments.m4.array() - 4.0 + beta).matrix().colwise().sum();
    f.r = column_sums.dot(abs2.cwiseAbs2()) / nn;
    f.s = v.dot(m3v).real() / nn;
    return f;
}

double OutlierLaw::total_variance(double hv_variance) const {
    const double d2 = d * d;
    return pi_prefactor * pi_prefactor * hv_variance / (d2 * d2) + upsilon_variance;
}

OutlierLaw outlier_law(double d, const Eigen::VectorXcd& v, const MomentMatrices& moments,
                       int beta) {
    if (!(std::abs(d) > 1.0)) {
        throw DomainError("outlier_law: requires |d| > 1, got " + std::to_string(d));
    }
    OutlierLaw law;
    law.d = d;
    law.beta = beta;
    law.functionals = moment_functionals(moments, v, beta);

    const double a = std::abs(d);
    const double d2 = d * d;
    const double d4 = d2 * d2;
    law.pi_prefactor = (a + 1.0) * std::sqrt(a - 1.0);
    law.pi_mean_shift = law.pi_prefactor * law.functionals.s / d4;
    law.upsilon_variance =
        2.0 * (a + 1.0) / (beta * d4) +
        (a + 1.0) * (a + 1.0) * (a - 1.0) *
            (4.0 * law.functionals.q / (d4 * d) + law.functionals.r / (d4 * d2));
    return law;
}

double sample_predicted_outlier(const OutlierLaw& law, double hv_sample, double normal_draw) {
    if (law.upsilon_variance < 0.0) {
        throw DomainError("sample_predicted_outlier: negative Υ variance");
    }
    return law.pi_prefactor * hv_sample / (law.d * law.d) + law.pi_mean_shift +
           std::sqrt(law.upsilon_variance) * normal_draw;
}

}  // namespace wigner::theory
