#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "wigner/rng.hpp"
#include "wigner/theory.hpp"

namespace wigner {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
inline constexpr bool is_complex_v = !std::is_same_v<Scalar, typename Eigen::NumTraits<Scalar>::Real>;

/// Symmetry index matching a scalar type: 1 for real symmetric, 2 for complex Hermitian.
template <typename Scalar>
inline constexpr int beta_of = is_complex_v<Scalar> ? 2 : 1;

}  // namespace wigner

namespace wigner::ensembles {

enum class Family { gaussian, rademacher, skewed_two_point, uniform };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Entry law of a Wigner matrix. Off-diagonal entries have E|h|² = 1/N;
/// diagonal entries have E h² = 2/N (β = 1) or 1/N (β = 2). For β = 2 the
/// real and imaginary parts of off-diagonal entries are independent with
/// variance 1/(2N) each.
struct EnsembleSpec {
    int beta = 1;
    Family family = Family::gaussian;
    double skew = 0.0;  ///< third-moment target t of skewed_two_point
    long n = 1;
    /// Subexponential-decay constant ϑ; metadata only (every family is
    /// bounded or Gaussian).
    double decay = 1.0;

    void validate() const;
    /// True when E h³ = E h² conj(h) = 0 for every entry.
    bool third_moments_vanish() const;
};

/// Mean-zero, unit-variance scalar law underlying a family.
struct StandardLaw {
    Family family = Family::gaussian;
    double skew = 0.0;

    double third_moment() const;
    double fourth_moment() const;
    double draw(Rng& rng) const;
};

/// Two-point law taking `high` with probability `p_high` and `-low` otherwise,
/// with mean 0, variance 1 and third moment t.
struct TwoPoint {
    double high;
    double low;
    double p_high;
};
TwoPoint two_point_for_skew(double t);

/// Exact M3, M4 of an ensemble's entry law.
theory::MomentMatrices moment_matrices_of(const EnsembleSpec& spec);

/// Var(N^{1/2} <v, H v>) for a unit vector v, computed from the entry
/// variances; equals 2/β for real v (β = 1) and any v (β = 2).
double hv_variance(const EnsembleSpec& spec, const Eigen::VectorXcd& v);

/// Exact Hermitian sample. Scalar must be double for β = 1 and
/// std::complex<double> for β = 2. Deterministic in (spec, seed).
template <typename Scalar>
Matrix<Scalar> sample_wigner(const EnsembleSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Deformations
// ---------------------------------------------------------------------------

enum class BasisRecipe { standard_basis, uniform_vector, random_orthonormal, spike_plus_flat, explicit_basis };

std::string to_string(BasisRecipe recipe);
BasisRecipe recipe_from_string(const std::string& name);

/// Rank-k deformation V D V^* with nondecreasing nonzero d_1 <= ... <= d_k.
struct DeformationSpec {
    std::vector<double> d;
    BasisRecipe recipe = BasisRecipe::standard_basis;
    std::optional<Eigen::MatrixXcd> explicit_basis;

    long k() const { return static_cast<long>(d.size()); }
    void validate(long n) const;

    long k_minus() const;  ///< #{i : d_i < -1}
    long k_plus() const;   ///< #{i : d_i > 1}
    long n_positive() const;
    long n_negative() const;

    /// Zero-based indices i with |d_i| > 1 (the outlier set O).
    std::vector<long> outlier_indices() const;
    /// Zero-based eigenvalue index α(i) of the outlier attached to d_i.
    long outlier_eigen_index(long i, long n) const;
};

/// Orthonormal N×k basis for a recipe. `seed` is only used by random_orthonormal.
template <typename Scalar>
Matrix<Scalar> build_basis(BasisRecipe recipe, long n, long k, std::uint64_t seed,
                           const std::optional<Eigen::MatrixXcd>& explicit_basis = std::nullopt);

/// H + Σ_i d_i v^(i) (v^(i))^*, symmetrized so the result is exactly Hermitian.
template <typename Scalar>
Matrix<Scalar> deform(const Matrix<Scalar>& h, const std::vector<double>& d, const Matrix<Scalar>& basis);

/// Unit vector (2^{-1/2}, (2N-2)^{-1/2}, ..., (2N-2)^{-1/2}).
Eigen::VectorXd spike_plus_flat_vector(long n);

/// max_ij |(V^* V - I)_ij|.
template <typename Scalar>
double orthonormality_defect(const Matrix<Scalar>& basis);

extern template Matrix<double> sample_wigner<double>(const EnsembleSpec&, std::uint64_t);
extern template Matrix<cplx> sample_wigner<cplx>(const EnsembleSpec&, std::uint64_t);
extern template Matrix<double> build_basis<double>(BasisRecipe, long, long, std::uint64_t,
                                                   const std::optional<Eigen::MatrixXcd>&);
extern template Matrix<cplx> build_basis<cplx>(BasisRecipe, long, long, std::uint64_t,
                                               const std::optional<Eigen::MatrixXcd>&);
extern template Matrix<double> deform<double>(const Matrix<double>&, const std::vector<double>&,
                                              const Matrix<double>&);
extern template Matrix<cplx> deform<cplx>(const Matrix<cplx>&, const std::vector<double>&,
                                          const Matrix<cplx>&);
extern template double orthonormality_defect<double>(const Matrix<double>&);
extern template double orthonormality_defect<cplx>(const Matrix<cplx>&);

}  // namespace wigner::ensembles
