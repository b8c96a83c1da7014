#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wigner {

using cplx = std::complex<double>;

/// Raised when an argument lies outside the domain of a closed-form quantity.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace wigner

namespace wigner::theory {

// ---------------------------------------------------------------------------
// Semicircle law
// ---------------------------------------------------------------------------

/// Density of the semicircle law, (2π)^{-1} sqrt((4 - ξ²)_+).
double semicircle_density(double xi);

/// Distribution function of the semicircle law,
/// F(x) = 1/2 + (x sqrt(4 - x²) + 4 asin(x/2)) / (4π) on [-2, 2].
double semicircle_cdf(double x);

/// Stieltjes transform m(z) of the semicircle law: the root of m² + zm + 1 = 0
/// with Im m > 0 for Im z > 0, extended by m(z̄) = conj m(z).
/// Real z must satisfy |z| > 2; the returned value is then real and in [-1, 1].
cplx stieltjes(cplx z);

/// Real branch of m on R \ [-2, 2]; values in [-1, 1] \ {0}.
double stieltjes(double x);

/// m'(x) = m² / (1 - m²) for real |x| > 2.
double stieltjes_derivative(double x);

/// Distance ||E| - 2| from E to the nearest spectral edge.
double kappa(double energy);

/// θ(d) = d + 1/d, the limiting position of the outlier created by a spike d.
/// Defined for |d| >= 1 only.
double theta(double d);

/// Classical locations γ_1 < ... < γ_N, i.e. N F(γ_α) = α.
Eigen::VectorXd classical_locations(long n);

// ---------------------------------------------------------------------------
// Control parameters
// ---------------------------------------------------------------------------

struct ControlParams {
    long n = 0;
    cplx z;
    double psi_value = 0.0;  ///< sqrt(Im m / (Nη)) + 1/(Nη)
    double phi_value = 0.0;  ///< Im m + 1/(Nη)

    double energy() const { return z.real(); }
    double eta() const { return z.imag(); }
};

ControlParams control_params(cplx z, long n);

/// Evaluator bundling the semicircle quantities with the spectral window Σ.
class SemicircleModel {
public:
    explicit SemicircleModel(double sigma = 3.0);

    double sigma() const { return sigma_; }

    double density(double xi) const { return semicircle_density(xi); }
    double cdf(double x) const { return semicircle_cdf(x); }
    cplx stieltjes(cplx z) const { return theory::stieltjes(z); }
    double stieltjes_derivative(double x) const { return theory::stieltjes_derivative(x); }
    double kappa(double energy) const { return theory::kappa(energy); }
    ControlParams control(cplx z, long n) const { return control_params(z, n); }
    Eigen::VectorXd classical_locations(long n) const { return theory::classical_locations(n); }

    /// Membership in {|E| <= Σ, lower_eta <= η <= Σ}.
    bool in_window(cplx z, double lower_eta = 0.0) const;

private:
    double sigma_;
};

// ---------------------------------------------------------------------------
// Moment functionals and the outlier law
// ---------------------------------------------------------------------------

/// M3_ij = N^{3/2} E(|h_ij|² h_ij) and M4_ij = N² E|h_ij|⁴, both Hermitian.
struct MomentMatrices {
    Eigen::MatrixXcd m3;
    Eigen::MatrixXd m4;

    long size() const { return m4.rows(); }

    /// Off-diagonal entries share one value (the upper triangle carries
    /// `m3_offdiag`, the lower its conjugate); diagonal entries share another.
    static MomentMatrices uniform(long n, cplx m3_offdiag, double m3_diag, double m4_offdiag,
                                  double m4_diag);

    /// GOE (β = 1) or GUE (β = 2): M3 = 0, M4_ij = (4 - β) + δ_ij (17 - 8β).
    static MomentMatrices gaussian(long n, int beta);
};

/// Q(v), R(v), S(v). S is real because M3 is Hermitian.
struct MomentFunctionals {
    double q = 0.0;
    double r = 0.0;
    double s = 0.0;
};

MomentFunctionals moment_functionals(const MomentMatrices& moments, const Eigen::VectorXcd& v,
                                     int beta);

/// Predicted law of N^{1/2} (|d| - 1)^{-1/2} (μ - θ(d)) for the outlier of a
/// spike d in direction v: Π + Υ with
///   Π = prefactor · (N^{1/2}<v, H v> / d² + S(v) / d⁴),
///   Υ ~ N(0, upsilon_variance), independent of Π.
struct OutlierLaw {
    double d = 0.0;
    int beta = 1;
    double pi_prefactor = 0.0;
    double pi_mean_shift = 0.0;
    double upsilon_variance = 0.0;
    MomentFunctionals functionals;

    double mean() const { return pi_mean_shift; }

    /// Variance of Π + Υ given Var(N^{1/2}<v, H v>).
    double total_variance(double hv_variance) const;
};

OutlierLaw outlier_law(double d, const Eigen::VectorXcd& v, const MomentMatrices& moments,
                       int beta);

/// One draw of Π + Υ from a draw of N^{1/2}<v, H v> and a standard normal.
double sample_predicted_outlier(const OutlierLaw& law, double hv_sample, double normal_draw);

}  // namespace wigner::theory
