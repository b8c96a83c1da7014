#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "doctest.h"
#include "wigner/ensembles.hpp"
#include "wigner/spectral.hpp"

using namespace wigner;
using namespace wigner::spectral;
using ensembles::EnsembleSpec;
using ensembles::Family;

namespace {

template <typename S>
Matrix<S> wigner_matrix(long n, std::uint64_t seed) {
    return ensembles::sample_wigner<S>(EnsembleSpec{beta_of<S>, Family::gaussian, 0.0, n}, seed);
}

}  // namespace

TEST_CASE_TEMPLATE("eigh agrees with Eigen's self-adjoint solver", S, double, cplx) {
    for (long n : {1L, 2L, 3L, 10L, 57L, 128L}) {
        const auto h = wigner_matrix<S>(n, static_cast<std::uint64_t>(n));
        const auto dec = eigh(h);
        const Eigen::SelfAdjointEigenSolver<Matrix<S>> ref(h, Eigen::EigenvaluesOnly);
        CHECK((dec.eigenvalues - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(eigen_residual(h, dec) < 1e-12);
        CHECK(orthogonality_residual(dec) < 1e-12);
        for (long a = 1; a < n; ++a) CHECK(dec.eigenvalues(a) >= dec.eigenvalues(a - 1));

        const auto values = eigh(h, EigenMode::values_only);
        CHECK_FALSE(values.has_vectors());
        CHECK((values.eigenvalues - dec.eigenvalues).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("eigh on a 2x2 matrix with known spectrum") {
    Matrix<cplx> h(2, 2);
    h << 1.0, cplx(0.0, 2.0), cplx(0.0, -2.0), -2.0;
    // Eigenvalues of [[a, b], [b̄, c]]: (a + c)/2 ± sqrt(((a - c)/2)² + |b|²).
    const double r = std::sqrt(2.25 + 4.0);
    const auto dec = eigh(h);
    CHECK(dec.eigenvalues(0) == doctest::Approx(-0.5 - r).epsilon(1e-15));
    CHECK(dec.eigenvalues(1) == doctest::Approx(-0.5 + r).epsilon(1e-15));
    CHECK(eigen_residual(h, dec) < 1e-14);
}

TEST_CASE("eigh handles degenerate and diagonal matrices") {
    const Matrix<double> id = Matrix<double>::Identity(6, 6) * 3.0;
    const auto a = eigh(id);
    CHECK((a.eigenvalues.array() - 3.0).abs().maxCoeff() < 1e-15);
    CHECK(orthogonality_residual(a) < 1e-15);

    Matrix<double> diag = Matrix<double>::Zero(5, 5);
    diag.diagonal() << 4.0, -1.0, 2.0, 0.0, 3.0;
    const auto b = eigh(diag);
    CHECK(b.eigenvalues(0) == -1.0);
    CHECK(b.eigenvalues(4) == 4.0);
    // Localized eigenvectors: the eigenvector of 4 is e_1.
    CHECK(std::abs(std::abs(b.eigenvectors(0, 4)) - 1.0) < 1e-15);

    const Matrix<cplx> zero = Matrix<cplx>::Zero(4, 4);
    const auto c = eigh(zero);
    CHECK(c.eigenvalues.cwiseAbs().maxCoeff() == 0.0);
    CHECK(orthogonality_residual(c) < 1e-15);
}

TEST_CASE("eigh rejects non-Hermitian input") {
    Matrix<double> a = wigner_matrix<double>(8, 1);
    a(0, 1) += 1e-6;
    CHECK_THROWS_AS(eigh(a), NotHermitianError);
    Matrix<cplx> b = wigner_matrix<cplx>(8, 1);
    b(2, 2) += cplx(0.0, 1e-6);
    CHECK_THROWS_AS(eigh(b), NotHermitianError);
    CHECK_THROWS_AS(eigh(Matrix<double>(2, 3)), NotHermitianError);
}

TEST_CASE_TEMPLATE("tridiagonal reduction is a unitary similarity", S, double, cplx) {
    const long n = 30;
    const auto h = wigner_matrix<S>(n, 77);
    const auto t = householder_tridiagonalize<S>(h, true);
    Matrix<S> tri = Matrix<S>::Zero(n, n);
    for (long i = 0; i < n; ++i) {
        tri(i, i) = t.diagonal(i);
        if (i + 1 < n) tri(i + 1, i) = tri(i, i + 1) = t.subdiagonal(i);
    }
    CHECK((t.q.adjoint() * h * t.q - tri).norm() < 1e-12);
    CHECK((t.q.adjoint() * t.q - Matrix<S>::Identity(n, n)).norm() < 1e-13);
    CHECK(t.subdiagonal(n - 1) == 0.0);
}

TEST_CASE_TEMPLATE("resolvent bilinear form equals the direct inverse", S, double, cplx) {
    const long n = 40;
    const auto h = wigner_matrix<S>(n, 3);
    const auto dec = eigh(h);
    const Vector<S> v = Vector<S>::LinSpaced(n, S(-1), S(2)).normalized();
    Vector<S> w = Vector<S>::Zero(n);
    w(3) = S(1);
    for (cplx z : {cplx(0.3, 0.1), cplx(-1.9, 0.01), cplx(2.6, 0.5), cplx(3.0, 0.0)}) {
        const Eigen::MatrixXcd g = (h.template cast<cplx>() - z * Eigen::MatrixXcd::Identity(n, n)).inverse();
        const cplx direct = v.template cast<cplx>().dot(g * w.template cast<cplx>());
        CHECK(std::abs(resolvent_bilinear(dec, v, w, z) - direct) < 1e-11);
    }
    const cplx z(0.2, 0.3);
    CHECK(isotropic_residual(dec, v, w, z) ==
          doctest::Approx(std::abs(resolvent_bilinear(dec, v, w, z) - theory::stieltjes(z) * cplx(v.dot(w)))));
    CHECK_THROWS_AS(resolvent_bilinear(dec, v, w, cplx(dec.eigenvalues(5), 0.0)), PoleError);
    CHECK_THROWS(isotropic_residual(dec, v, w, cplx(0.2, 0.0)));
}

TEST_CASE("resolvent of a 2x2 matrix by hand") {
    Matrix<double> h(2, 2);
    h << 0.5, 0.2, 0.2, -0.1;
    const cplx z(0.1, 0.4);
    // (H - z)^{-1} = adj / det.
    const cplx a = 0.5 - z, d = -0.1 - z, b = 0.2;
    const cplx det = a * d - b * b;
    const cplx g01 = -b / det;
    Vector<double> e0 = Vector<double>::Unit(2, 0), e1 = Vector<double>::Unit(2, 1);
    CHECK(std::abs(resolvent_bilinear(eigh(h), e0, e1, z) - g01) < 1e-15);
    CHECK(std::abs(resolvent_bilinear(eigh(h), e0, e0, z) - d / det) < 1e-15);
}

TEST_CASE_TEMPLATE("determinant identity recovers exterior eigenvalues", S, double, cplx) {
    const long n = 80;
    const auto h = wigner_matrix<S>(n, 21);
    const auto dec = eigh(h);
    const auto v = ensembles::build_basis<S>(ensembles::BasisRecipe::random_orthonormal, n, 3, 8);
    const std::vector<double> d{-2.5, 0.7, 3.0};
    const Eigen::VectorXd mu = eigh(ensembles::deform(h, d, v), EigenMode::values_only).eigenvalues;
    const double lo = dec.eigenvalues(0);
    const double hi = dec.eigenvalues(n - 1);

    const auto right = deformed_eigenvalues_via_det(dec, v, d, hi + 1e-6, hi + 5.0);
    const auto left = deformed_eigenvalues_via_det(dec, v, d, lo - 5.0, lo - 1e-6);
    REQUIRE(right.size() >= 1);
    REQUIRE(left.size() == 1);
    CHECK(std::abs(right.back() - mu(n - 1)) < 1e-10);
    CHECK(std::abs(left.front() - mu(0)) < 1e-10);

    // Interior roots between poles also match.
    const auto inner = deformed_eigenvalues_via_det(dec, v, d, -1.0, 1.0);
    for (double r : inner) CHECK((mu.array() - r).abs().minCoeff() < 1e-9);

    CHECK_THROWS_AS(deformed_eigenvalues_via_det(dec, v, d, hi, hi + 1.0), BracketingError);
}

TEST_CASE("determinant identity for a rank-one spike matches the secular equation") {
    // 1 + d Σ |<u_α, v>|² / (λ_α - μ) = 0 at a diagonal matrix.
    Matrix<double> h = Matrix<double>::Zero(3, 3);
    h.diagonal() << -1.0, 0.0, 1.0;
    const Matrix<double> v = Matrix<double>::Constant(3, 1, 1.0 / std::sqrt(3.0));
    const double d = 3.0;
    const auto roots = deformed_eigenvalues_via_det(eigh(h), v, {d}, 1.0 + 1e-9, 10.0);
    REQUIRE(roots.size() == 1);
    const double mu = roots[0];
    const double secular = 1.0 + d / 3.0 * (1.0 / (-1.0 - mu) + 1.0 / (0.0 - mu) + 1.0 / (1.0 - mu));
    CHECK(std::abs(secular) < 1e-10);
    const Eigen::SelfAdjointEigenSolver<Matrix<double>> ref(h + d * v * v.transpose());
    CHECK(mu == doctest::Approx(ref.eigenvalues()(2)).epsilon(1e-13));
}

TEST_CASE("interlacing") {
    const long n = 64;
    const auto h = wigner_matrix<double>(n, 2);
    const Eigen::VectorXd lam = eigh(h, EigenMode::values_only).eigenvalues;
    const auto v = ensembles::build_basis<double>(ensembles::BasisRecipe::uniform_vector, n, 1, 0);
    for (double d : {-3.0, -0.4, 0.4, 3.0}) {
        const Eigen::VectorXd mu = eigh(ensembles::deform(h, {d}, v), EigenMode::values_only).eigenvalues;
        CHECK(interlacing_violation(lam, mu, d > 0, d < 0) <= 1e-12);
    }
    // A fabricated violation is measured exactly.
    Eigen::VectorXd lam2(3), mu2(3);
    lam2 << 0.0, 1.0, 2.0;
    mu2 << 0.0, 1.5, 2.0;
    CHECK(interlacing_violation(lam2, mu2, 0, 1) == doctest::Approx(0.5));
    CHECK(interlacing_violation(lam2, mu2, 1, 0) == 0.0);
}
