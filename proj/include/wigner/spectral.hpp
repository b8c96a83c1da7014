#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wigner/ensembles.hpp"

namespace wigner::spectral {

class NotHermitianError : public std::invalid_argument {
public:
    explicit NotHermitianError(const std::string& what) : std::invalid_argument(what) {}
};

/// Real spectral parameter too close to an eigenvalue.
class PoleError : public std::domain_error {
public:
    explicit PoleError(const std::string& what) : std::domain_error(what) {}
};

/// Search interval for the determinant identity starts or ends on an eigenvalue.
class BracketingError : public std::runtime_error {
public:
    explicit BracketingError(const std::string& what) : std::runtime_error(what) {}
};

enum class EigenMode { values_only, with_vectors };

/// Ascending eigenvalues and, optionally, the unitary matrix whose column α
/// is the normalized eigenvector of eigenvalue α.
template <typename Scalar>
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Matrix<Scalar> eigenvectors;

    long size() const { return eigenvalues.size(); }
    bool has_vectors() const { return eigenvectors.size() > 0; }
};

/// Real symmetric tridiagonal form T = Q^* A Q of a Hermitian matrix.
template <typename Scalar>
struct Tridiagonal {
    Eigen::VectorXd diagonal;
    Eigen::VectorXd subdiagonal;  ///< size n; the last entry is 0
    Matrix<Scalar> q;             ///< empty unless requested
};

/// Householder reduction of the lower triangle of a Hermitian matrix.
template <typename Scalar>
Tridiagonal<Scalar> householder_tridiagonalize(Matrix<Scalar> a, bool want_q);

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix. On return
/// `diagonal` holds the (unsorted) eigenvalues; if `z` is non-null its columns
/// are rotated alongside so that z_in · (rotations) gives the eigenvectors.
template <typename Scalar>
void implicit_ql(Eigen::VectorXd& diagonal, Eigen::VectorXd& subdiagonal, Matrix<Scalar>* z);

/// Dense Hermitian eigendecomposition. Throws NotHermitianError when
/// max|H - H^*| exceeds 1e-12 · max(1, max|H_ij|).
template <typename Scalar>
SpectralDecomposition<Scalar> eigh(const Matrix<Scalar>& h, EigenMode mode = EigenMode::with_vectors);

/// Σ_α conj(a_α) b_α / (λ_α - z) for overlaps a = U^* v, b = U^* w.
template <typename Scalar>
cplx resolvent_from_overlaps(const Eigen::VectorXd& eigenvalues, const Vector<Scalar>& a,
                             const Vector<Scalar>& b, cplx z);

/// <v, G(z) w> with G(z) = (H - z)^{-1}.
template <typename Scalar>
cplx resolvent_bilinear(const SpectralDecomposition<Scalar>& dec, const Vector<Scalar>& v,
                        const Vector<Scalar>& w, cplx z);

/// |<v, G(z) w> - m(z) <v, w>| for Im z > 0.
template <typename Scalar>
double isotropic_residual(const SpectralDecomposition<Scalar>& dec, const Vector<Scalar>& v,
                          const Vector<Scalar>& w, cplx z);

/// Eigenvalues of H + V D V^* in (lower, upper) that are not eigenvalues of H,
/// found as the roots of μ ↦ det(V^* G(μ) V + D^{-1}). The interval is split at
/// the poles σ(H), scanned at `grid_step` (default: length / 1000, refined
/// geometrically towards poles), and each sign change is bisected.
template <typename Scalar>
std::vector<double> deformed_eigenvalues_via_det(const SpectralDecomposition<Scalar>& dec,
                                                 const Matrix<Scalar>& basis,
                                                 const std::vector<double>& d, double lower,
                                                 double upper, double grid_step = 0.0);

/// Largest violation of λ_{α-q}(H) <= μ_α <= λ_{α+p}(H) where p and q count the
/// positive and negative eigenvalues of the perturbation. Zero when interlaced.
double interlacing_violation(const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu, long n_positive,
                             long n_negative);

/// max_α ‖H u_α - λ_α u_α‖ and ‖U^* U - I‖_max.
template <typename Scalar>
double eigen_residual(const Matrix<Scalar>& h, const SpectralDecomposition<Scalar>& dec);
template <typename Scalar>
double orthogonality_residual(const SpectralDecomposition<Scalar>& dec);

#define WIGNER_SPECTRAL_EXTERN(S)                                                                   \
    extern template Tridiagonal<S> householder_tridiagonalize<S>(Matrix<S>, bool);                  \
    extern template void implicit_ql<S>(Eigen::VectorXd&, Eigen::VectorXd&, Matrix<S>*);           \
    extern template SpectralDecomposition<S> eigh<S>(const Matrix<S>&, EigenMode);                  \
    extern template cplx resolvent_from_overlaps<S>(const Eigen::VectorXd&, const Vector<S>&,       \
                                                    const Vector<S>&, cplx);                        \
    extern template cplx resolvent_bilinear<S>(const SpectralDecomposition<S>&, const Vector<S>&,   \
                                               const Vector<S>&, cplx);                             \
    extern template double isotropic_residual<S>(const SpectralDecomposition<S>&, const Vector<S>&, \
                                                 const Vector<S>&, cplx);                           \
    extern template std::vector<double> deformed_eigenvalues_via_det<S>(                            \
        const SpectralDecomposition<S>&, const Matrix<S>&, const std::vector<double>&, double,      \
        double, double);                                                                            \
    extern template double eigen_residual<S>(const Matrix<S>&, const SpectralDecomposition<S>&);    \
    extern template double orthogonality_residual<S>(const SpectralDecomposition<S>&);

WIGNER_SPECTRAL_EXTERN(double)
WIGNER_SPECTRAL_EXTERN(cplx)
#undef WIGNER_SPECTRAL_EXTERN

}  // namespace wigner::spectral
