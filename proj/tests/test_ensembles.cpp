#include <cmath>

#include "doctest.h"
#include "wigner/ensembles.hpp"

using namespace wigner;
using namespace wigner::ensembles;

TEST_CASE("family and recipe names round-trip") {
    for (Family f : {Family::gaussian, Family::rademacher, Family::skewed_two_point, Family::uniform}) {
        CHECK(family_from_string(to_string(f)) == f);
    }
    CHECK(family_from_string("skewed") == Family::skewed_two_point);
    CHECK_THROWS_AS(family_from_string("cauchy"), std::invalid_argument);
    for (BasisRecipe r : {BasisRecipe::standard_basis, BasisRecipe::uniform_vector, BasisRecipe::random_orthonormal,
                          BasisRecipe::spike_plus_flat, BasisRecipe::explicit_basis}) {
        CHECK(recipe_from_string(to_string(r)) == r);
    }
    CHECK(recipe_from_string("uniform") == BasisRecipe::uniform_vector);
    CHECK(recipe_from_string("random") == BasisRecipe::random_orthonormal);
    CHECK_THROWS_AS(recipe_from_string("haar"), std::invalid_argument);
}

TEST_CASE("standard laws have the advertised moments") {
    CHECK(StandardLaw{Family::gaussian, 0.0}.fourth_moment() == 3.0);
    CHECK(StandardLaw{Family::rademacher, 0.0}.fourth_moment() == 1.0);
    CHECK(StandardLaw{Family::uniform, 0.0}.fourth_moment() == doctest::Approx(1.8));
    CHECK(StandardLaw{Family::skewed_two_point, 1.0}.fourth_moment() == doctest::Approx(2.0));
    CHECK(StandardLaw{Family::skewed_two_point, 1.0}.third_moment() == 1.0);
    CHECK(StandardLaw{Family::uniform, 0.0}.third_moment() == 0.0);

    // Empirical moments of 4·10⁵ draws.
    for (const StandardLaw law : {StandardLaw{Family::gaussian, 0.0}, StandardLaw{Family::rademacher, 0.0},
                                  StandardLaw{Family::uniform, 0.0}, StandardLaw{Family::skewed_two_point, 0.7}}) {
        Rng rng(11);
        const int n = 400000;
        double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
        for (int i = 0; i < n; ++i) {
            const double x = law.draw(rng);
            m1 += x;
            m2 += x * x;
            m3 += x * x * x;
            m4 += x * x * x * x;
        }
        CHECK(std::abs(m1 / n) < 0.01);
        CHECK(std::abs(m2 / n - 1.0) < 0.01);
        CHECK(std::abs(m3 / n - law.third_moment()) < 0.03);
        CHECK(std::abs(m4 / n - law.fourth_moment()) < 0.05);
    }
}

TEST_CASE("two-point law for a given skew") {
    const TwoPoint tp = two_point_for_skew(1.0);
    CHECK(tp.high == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0));
    CHECK(tp.low == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0));
    const double p = tp.p_high;
    CHECK(p * tp.high - (1 - p) * tp.low == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p * tp.high * tp.high + (1 - p) * tp.low * tp.low == doctest::Approx(1.0));
    CHECK(p * std::pow(tp.high, 3) - (1 - p) * std::pow(tp.low, 3) == doctest::Approx(1.0));
    // t = 0 reduces to Rademacher.
    CHECK(two_point_for_skew(0.0).p_high == doctest::Approx(0.5));
}

TEST_CASE("ensemble parameter validation") {
    EnsembleSpec spec;
    spec.n = 10;
    CHECK_NOTHROW(spec.validate());
    spec.beta = 3;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.beta = 1;
    spec.n = 0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    EnsembleSpec skewed{1, Family::skewed_two_point, 1.0, 10};
    CHECK_FALSE(skewed.third_moments_vanish());
    skewed.skew = 0.0;
    CHECK(skewed.third_moments_vanish());
    CHECK(EnsembleSpec{2, Family::uniform, 0.0, 10}.third_moments_vanish());
}

TEST_CASE("Wigner samples are Hermitian and reproducible") {
    const EnsembleSpec real{1, Family::gaussian, 0.0, 40};
    const auto a = sample_wigner<double>(real, 5);
    CHECK(a == a.transpose());
    CHECK(a == sample_wigner<double>(real, 5));
    CHECK((a - sample_wigner<double>(real, 6)).norm() > 1.0);

    const EnsembleSpec cx{2, Family::rademacher, 0.0, 30};
    const auto b = sample_wigner<cplx>(cx, 5);
    CHECK(b == b.adjoint());
    CHECK(b.diagonal().imag().norm() == 0.0);

    CHECK_THROWS(sample_wigner<cplx>(real, 1));
    CHECK_THROWS(sample_wigner<double>(cx, 1));
}

TEST_CASE("entry variances follow the normalization") {
    const long n = 300;
    for (int beta : {1, 2}) {
        const EnsembleSpec spec{beta, Family::uniform, 0.0, n};
        double off = 0.0, diag = 0.0, re = 0.0;
        long count = 0;
        const int reps = 4;
        for (int r = 0; r < reps; ++r) {
            if (beta == 1) {
                const auto h = sample_wigner<double>(spec, 100 + r);
                for (long j = 0; j < n; ++j) {
                    diag += h(j, j) * h(j, j);
                    for (long i = 0; i < j; ++i) off += h(i, j) * h(i, j), re += h(i, j) * h(i, j), ++count;
                }
            } else {
                const auto h = sample_wigner<cplx>(spec, 100 + r);
                for (long j = 0; j < n; ++j) {
                    diag += std::norm(h(j, j));
                    for (long i = 0; i < j; ++i) off += std::norm(h(i, j)), re += std::pow(h(i, j).real(), 2), ++count;
                }
            }
        }
        const double nn = static_cast<double>(n);
        off *= nn / count;
        re *= nn / count;
        diag *= nn / (reps * nn);
        CHECK(off == doctest::Approx(1.0).epsilon(0.02));
        CHECK(re == doctest::Approx(beta == 1 ? 1.0 : 0.5).epsilon(0.02));
        CHECK(diag == doctest::Approx(beta == 1 ? 2.0 : 1.0).epsilon(0.12));
    }
}

TEST_CASE("moment matrices of the entry laws") {
    const double t = 0.6;
    const EnsembleSpec real{1, Family::skewed_two_point, t, 6};
    const auto mr = moment_matrices_of(real);
    CHECK(mr.m3(0, 1).real() == doctest::Approx(t));
    CHECK(mr.m3(2, 2).real() == doctest::Approx(2.0 * std::sqrt(2.0) * t));
    CHECK(mr.m4(0, 1) == doctest::Approx(t * t + 1.0));
    CHECK(mr.m4(3, 3) == doctest::Approx(4.0 * (t * t + 1.0)));

    const EnsembleSpec cx{2, Family::skewed_two_point, t, 6};
    const auto mc = moment_matrices_of(cx);
    CHECK(std::abs(mc.m3(0, 1) - cplx(t, t) / (2.0 * std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(mc.m3(1, 0) - std::conj(mc.m3(0, 1))) < 1e-15);
    CHECK(mc.m3(4, 4).real() == doctest::Approx(t));
    CHECK(mc.m4(0, 1) == doctest::Approx((t * t + 2.0) / 2.0));

    // Monte Carlo of N^{3/2} E(|h|² h) for the complex off-diagonal entry.
    const long n = 200;
    cplx acc = 0.0;
    long count = 0;
    for (int r = 0; r < 6; ++r) {
        const auto h = sample_wigner<cplx>(EnsembleSpec{2, Family::skewed_two_point, t, n}, 7 + r);
        for (long j = 1; j < n; ++j) {
            for (long i = 0; i < j; ++i) acc += std::norm(h(i, j)) * h(i, j), ++count;
        }
    }
    acc *= std::pow(static_cast<double>(n), 1.5) / static_cast<double>(count);
    CHECK(std::abs(acc - mc.m3(0, 1)) < 0.02);

    const auto goe = moment_matrices_of(EnsembleSpec{1, Family::gaussian, 0.0, 4});
    CHECK(goe.m4.isApprox(theory::MomentMatrices::gaussian(4, 1).m4));
    CHECK(goe.m3.norm() == 0.0);
    const auto gue = moment_matrices_of(EnsembleSpec{2, Family::gaussian, 0.0, 4});
    CHECK(gue.m4.isApprox(theory::MomentMatrices::gaussian(4, 2).m4));
}

TEST_CASE("variance of N^{1/2}<v, H v> collapses to 2/beta") {
    const long n = 50;
    Rng rng(3);
    std::normal_distribution<double> g;
    Eigen::VectorXcd real_v(n), complex_v(n);
    for (long i = 0; i < n; ++i) {
        real_v(i) = g(rng);
        complex_v(i) = cplx(g(rng), g(rng));
    }
    real_v.normalize();
    complex_v.normalize();
    for (Family f : {Family::gaussian, Family::rademacher, Family::skewed_two_point}) {
        CHECK(std::abs(hv_variance(EnsembleSpec{1, f, 0.5, n}, real_v) - 2.0) < 1e-12);
        CHECK(std::abs(hv_variance(EnsembleSpec{2, f, 0.5, n}, complex_v) - 1.0) < 1e-12);
        CHECK(std::abs(hv_variance(EnsembleSpec{2, f, 0.5, n}, real_v) - 1.0) < 1e-12);
    }
    // A complex direction with a real symmetric matrix loses variance.
    CHECK(hv_variance(EnsembleSpec{1, Family::gaussian, 0.0, n}, complex_v) < 2.0);

    // Monte Carlo against sampled matrices.
    const EnsembleSpec spec{1, Family::rademacher, 0.0, n};
    double s2 = 0.0;
    const int reps = 4000;
    const Eigen::VectorXd v = real_v.real();
    for (int r = 0; r < reps; ++r) {
        const auto h = sample_wigner<double>(spec, 1000 + r);
        const double x = std::sqrt(static_cast<double>(n)) * v.dot(h * v);
        s2 += x * x;
    }
    CHECK(s2 / reps == doctest::Approx(2.0).epsilon(0.08));
}

TEST_CASE("deformation bookkeeping") {
    DeformationSpec def{{-3.0, -0.5, 0.5, 2.0, 4.0}, BasisRecipe::standard_basis, std::nullopt};
    CHECK(def.k() == 5);
    CHECK(def.k_minus() == 1);
    CHECK(def.k_plus() == 2);
    CHECK(def.n_negative() == 2);
    CHECK(def.n_positive() == 3);
    CHECK(def.outlier_indices() == std::vector<long>{0, 3, 4});
    CHECK(def.outlier_eigen_index(0, 100) == 0);
    CHECK(def.outlier_eigen_index(3, 100) == 98);
    CHECK(def.outlier_eigen_index(4, 100) == 99);
    CHECK_NOTHROW(def.validate(10));
    CHECK_THROWS(def.validate(4));

    CHECK_THROWS((DeformationSpec{{2.0, 1.5}, BasisRecipe::standard_basis, std::nullopt}.validate(10)));
    CHECK_THROWS((DeformationSpec{{0.0}, BasisRecipe::standard_basis, std::nullopt}.validate(10)));
    CHECK_THROWS((DeformationSpec{{}, BasisRecipe::standard_basis, std::nullopt}.validate(10)));
    CHECK_THROWS((DeformationSpec{{1.5}, BasisRecipe::explicit_basis, std::nullopt}.validate(10)));
}

TEST_CASE("bases are orthonormal") {
    const long n = 64;
    for (BasisRecipe r : {BasisRecipe::standard_basis, BasisRecipe::uniform_vector, BasisRecipe::random_orthonormal,
                          BasisRecipe::spike_plus_flat}) {
        for (long k : {1L, 3L}) {
            CHECK(orthonormality_defect(build_basis<double>(r, n, k, 9)) < 1e-13);
            CHECK(orthonormality_defect(build_basis<cplx>(r, n, k, 9)) < 1e-13);
        }
    }
    const auto e = build_basis<double>(BasisRecipe::standard_basis, n, 2, 0);
    CHECK(e.col(0) == Eigen::VectorXd::Unit(n, 0));
    CHECK(e.col(1) == Eigen::VectorXd::Unit(n, 1));

    const auto u = build_basis<double>(BasisRecipe::uniform_vector, n, 1, 0);
    CHECK(u.col(0).isApprox(Eigen::VectorXd::Constant(n, 1.0 / 8.0)));

    const auto s = build_basis<double>(BasisRecipe::spike_plus_flat, n, 1, 0);
    CHECK(s.col(0).isApprox(spike_plus_flat_vector(n)));
    CHECK(spike_plus_flat_vector(n).norm() == doctest::Approx(1.0));
    CHECK(spike_plus_flat_vector(n)(0) == doctest::Approx(std::sqrt(0.5)));

    const auto r1 = build_basis<cplx>(BasisRecipe::random_orthonormal, n, 2, 4);
    CHECK(r1 == build_basis<cplx>(BasisRecipe::random_orthonormal, n, 2, 4));
    CHECK((r1 - build_basis<cplx>(BasisRecipe::random_orthonormal, n, 2, 5)).norm() > 0.1);
    CHECK(r1.imag().norm() > 0.1);
}

TEST_CASE("explicit bases") {
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(4, 2);
    v(0, 0) = 1.0;
    v(1, 1) = cplx(0.0, 1.0);
    const auto b = build_basis<cplx>(BasisRecipe::explicit_basis, 4, 2, 0, v);
    CHECK((b - v).norm() < 1e-15);
    CHECK_THROWS(build_basis<double>(BasisRecipe::explicit_basis, 4, 2, 0, v));  // not real
    v(0, 1) = 0.5;
    CHECK_THROWS(build_basis<cplx>(BasisRecipe::explicit_basis, 4, 2, 0, v));  // not orthonormal
    CHECK_THROWS(build_basis<cplx>(BasisRecipe::explicit_basis, 4, 2, 0));
}

TEST_CASE("deform adds V D V^*") {
    const long n = 20;
    const auto h = sample_wigner<cplx>(EnsembleSpec{2, Family::gaussian, 0.0, n}, 1);
    const auto v = build_basis<cplx>(BasisRecipe::random_orthonormal, n, 2, 2);
    const std::vector<double> d{-1.5, 3.0};
    const auto ht = deform(h, d, v);
    CHECK(ht == ht.adjoint());
    Eigen::MatrixXcd expected = h;
    for (int i = 0; i < 2; ++i) expected += d[i] * v.col(i) * v.col(i).adjoint();
    CHECK((ht - expected).norm() < 1e-14);
    CHECK_THROWS(deform(h, {1.0}, v));
}
