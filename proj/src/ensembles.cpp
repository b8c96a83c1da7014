#include "wigner/ensembles.hpp"

#include <cmath>
#include <stdexcept>

namespace wigner::ensembles {

namespace {

constexpr double sqrt3 = 1.7320508075688772;

template <typename Scalar>
void require_beta(const EnsembleSpec& spec) {
    if (spec.beta != beta_of<Scalar>) {
        throw std::invalid_argument("scalar type does not match beta = " + std::to_string(spec.beta));
    }
}

/// Stateful sampler so Gaussian draws keep the distribution's cached pair.
class EntrySampler {
public:
    explicit EntrySampler(const StandardLaw& law) : law_(law) {
        if (law.family == Family::skewed_two_point) {
            const TwoPoint tp = two_point_for_skew(law.skew);
            high_ = tp.high;
            low_ = tp.low;
            p_high_ = tp.p_high;
        }
    }

    double operator()(Rng& rng) {
        switch (law_.family) {
            case Family::gaussian: return normal_(rng);
            case Family::rademacher: return (rng() >> 63) != 0 ? 1.0 : -1.0;
            case Family::uniform: return uniform_(rng) * sqrt3;
            case Family::skewed_two_point: return unit_(rng) < p_high_ ? high_ : -low_;
        }
        return 0.0;
    }

private:
    StandardLaw law_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{-1.0, 1.0};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    double high_ = 1.0;
    double low_ = 1.0;
    double p_high_ = 0.5;
};

/// Two passes of modified Gram-Schmidt of `col` against the first `count` columns.
template <typename Scalar>
void orthogonalize_against(Matrix<Scalar>& basis, long count, Vector<Scalar>& col) {
    for (int pass = 0; pass < 2; ++pass) {
        for (long j = 0; j < count; ++j) {
            col -= basis.col(j) * basis.col(j).dot(col);
        }
    }
}

template <typename Scalar>
Matrix<Scalar> complete_from(const Vector<Scalar>& first, long n, long k) {
    Matrix<Scalar> basis(n, k);
    basis.col(0) = first.normalized();
    long filled = 1;
    for (long e = 0; filled < k; ++e) {
        if (e >= n) throw std::runtime_error("complete_from: could not complete basis");
        Vector<Scalar> col = Vector<Scalar>::Unit(n, e);
        orthogonalize_against(basis, filled, col);
        const double norm = col.norm();
        if (norm < 1e-6) continue;
        basis.col(filled++) = col / norm;
    }
    return basis;
}

template <typename Scalar>
Matrix<Scalar> reorthonormalize(const Matrix<Scalar>& v) {
    Matrix<Scalar> basis(v.rows(), v.cols());
    for (long j = 0; j < v.cols(); ++j) {
        Vector<Scalar> col = v.col(j);
        orthogonalize_against(basis, j, col);
        basis.col(j) = col.normalized();
    }
    return basis;
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::gaussian: return "gaussian";
        case Family::rademacher: return "rademacher";
        case Family::skewed_two_point: return "skewed_two_point";
        case Family::uniform: return "uniform";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "rademacher") return Family::rademacher;
    if (name == "skewed_two_point" || name == "skewed") return Family::skewed_two_point;
    if (name == "uniform") return Family::uniform;
    throw std::invalid_argument("unknown entry family '" + name + "'");
}

void EnsembleSpec::validate() const {
    if (beta != 1 && beta != 2) throw std::invalid_argument("beta must be 1 or 2");
    if (n < 1) throw std::invalid_argument("N must be positive");
    if (!std::isfinite(skew)) throw std::invalid_argument("skew must be finite");
}

bool EnsembleSpec::third_moments_vanish() const {
    return family != Family::skewed_two_point || skew == 0.0;
}

TwoPoint two_point_for_skew(double t) {
    const double high = 0.5 * (t + std::sqrt(t * t + 4.0));
    const double low = high - t;
    return {high, low, low / (high + low)};
}

double StandardLaw::third_moment() const {
    return family == Family::skewed_two_point ? skew : 0.0;
}

double StandardLaw::fourth_moment() const {
    switch (family) {
        case Family::gaussian: return 3.0;
        case Family::rademacher: return 1.0;
        case Family::uniform: return 9.0 / 5.0;
        case Family::skewed_two_point: return skew * skew + 1.0;
    }
    return 0.0;
}

double StandardLaw::draw(Rng& rng) const {
    EntrySampler sampler(*this);
    return sampler(rng);
}

theory::MomentMatrices moment_matrices_of(const EnsembleSpec& spec) {
    spec.validate();
    const StandardLaw law{spec.family, spec.skew};
    const double t = law.third_moment();
    const double k4 = law.fourth_moment();
    if (spec.beta == 1) {
        // Diagonal entries are sqrt(2) times the standard law.
        return theory::MomentMatrices::uniform(spec.n, t, 2.0 * std::sqrt(2.0) * t, k4, 4.0 * k4);
    }
    // Off-diagonal h = (x + iy)/sqrt(2N): E(|h|² h) = (t + it)/(2N)^{3/2} and
    // E|h|⁴ = (2 k4 + 2)/(4N²).
    const cplx m3_off = cplx(t, t) / (2.0 * std::sqrt(2.0));
    return theory::MomentMatrices::uniform(spec.n, m3_off, t, 0.5 * (k4 + 1.0), k4);
}

double hv_variance(const EnsembleSpec& spec, const Eigen::VectorXcd& v) {
    if (spec.beta == 2) return v.squaredNorm() * v.squaredNorm();
    const double aa = v.real().squaredNorm();
    const double bb = v.imag().squaredNorm();
    const double ab = v.real().dot(v.imag());
    return 2.0 * (aa * aa + bb * bb + 2.0 * ab * ab);
}

template <typename Scalar>
Matrix<Scalar> sample_wigner(const EnsembleSpec& spec, std::uint64_t seed) {
    spec.validate();
    require_beta<Scalar>(spec);
    Rng rng(seed);
    EntrySampler draw(StandardLaw{spec.family, spec.skew});
    const long n = spec.n;
    const double nn = static_cast<double>(n);
    Matrix<Scalar> h(n, n);
    if constexpr (is_complex_v<Scalar>) {
        const double off = 1.0 / std::sqrt(2.0 * nn);
        const double diag = 1.0 / std::sqrt(nn);
        for (long j = 0; j < n; ++j) {
            for (long i = 0; i < j; ++i) {
                const double re = draw(rng);
                const double im = draw(rng);
                const Scalar x(off * re, off * im);
                h(i, j) = x;
                h(j, i) = std::conj(x);
            }
            h(j, j) = diag * draw(rng);
        }
    } else {
        const double off = 1.0 / std::sqrt(nn);
        const double diag = std::sqrt(2.0 / nn);
        for (long j = 0; j < n; ++j) {
            for (long i = 0; i < j; ++i) {
                const double x = off * draw(rng);
                h(i, j) = x;
                h(j, i) = x;
            }
            h(j, j) = diag * draw(rng);
        }
    }
    return h;
}

std::string to_string(BasisRecipe recipe) {
    switch (recipe) {
        case BasisRecipe::standard_basis: return "standard_basis";
        case BasisRecipe::uniform_vector: return "uniform_vector";
        case BasisRecipe::random_orthonormal: return "random_orthonormal";
        case BasisRecipe::spike_plus_flat: return "spike_plus_flat";
        case BasisRecipe::explicit_basis: return "explicit";
    }
    return "unknown";
}

BasisRecipe recipe_from_string(const std::string& name) {
    if (name == "standard_basis" || name == "standard") return BasisRecipe::standard_basis;
    if (name == "uniform_vector" || name == "uniform") return BasisRecipe::uniform_vector;
    if (name == "random_orthonormal" || name == "random") return BasisRecipe::random_orthonormal;
    if (name == "spike_plus_flat") return BasisRecipe::spike_plus_flat;
    if (name == "explicit") return BasisRecipe::explicit_basis;
    throw std::invalid_argument("unknown basis recipe '" + name + "'");
}

void DeformationSpec::validate(long n) const {
    if (d.empty()) throw std::invalid_argument("deformation needs at least one d_i");
    if (k() > n) throw DomainError("deformation rank k exceeds N");
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0 || !std::isfinite(d[i])) {
            throw std::invalid_argument("deformation eigenvalues must be finite and nonzero");
        }
        if (i > 0 && d[i] < d[i - 1]) {
            throw std::invalid_argument("deformation eigenvalues must be nondecreasing");
        }
    }
    if (recipe == BasisRecipe::explicit_basis) {
        if (!explicit_basis) throw std::invalid_argument("explicit recipe needs a basis");
        if (explicit_basis->rows() != n || explicit_basis->cols() != k()) {
            throw std::invalid_argument("explicit basis must be N x k");
        }
    }
}

long DeformationSpec::k_minus() const {
    long c = 0;
    for (double x : d) c += x < -1.0;
    return c;
}

long DeformationSpec::k_plus() const {
    long c = 0;
    for (double x : d) c += x > 1.0;
    return c;
}

long DeformationSpec::n_positive() const {
    long c = 0;
    for (double x : d) c += x > 0.0;
    return c;
}

long DeformationSpec::n_negative() const {
    long c = 0;
    for (double x : d) c += x < 0.0;
    return c;
}

std::vector<long> DeformationSpec::outlier_indices() const {
    std::vector<long> out;
    for (long i = 0; i < k(); ++i) {
        if (std::abs(d[i]) > 1.0) out.push_back(i);
    }
    return out;
}

long DeformationSpec::outlier_eigen_index(long i, long n) const {
    if (i < 0 || i >= k() || !(std::abs(d[i]) > 1.0)) {
        throw std::invalid_argument("index is not an outlier index");
    }
    return d[i] > 1.0 ? n - k() + i : i;
}

Eigen::VectorXd spike_plus_flat_vector(long n) {
    if (n < 2) throw DomainError("spike_plus_flat needs N >= 2");
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(2.0 * n - 2.0));
    v(0) = 1.0 / std::sqrt(2.0);
    return v;
}

template <typename Scalar>
Matrix<Scalar> build_basis(BasisRecipe recipe, long n, long k, std::uint64_t seed,
                           const std::optional<Eigen::MatrixXcd>& explicit_basis) {
    if (k < 1) throw std::invalid_argument("basis rank must be positive");
    if (k > n) throw DomainError("basis rank k exceeds N");
    switch (recipe) {
        case BasisRecipe::standard_basis: return Matrix<Scalar>::Identity(n, k);
        case BasisRecipe::uniform_vector:
            return complete_from<Scalar>(Vector<Scalar>::Constant(n, Scalar(1.0 / std::sqrt(double(n)))), n, k);
        case BasisRecipe::spike_plus_flat:
            return complete_from<Scalar>(spike_plus_flat_vector(n).cast<Scalar>(), n, k);
        case BasisRecipe::random_orthonormal: {
            Rng rng(seed);
            std::normal_distribution<double> normal;
            Matrix<Scalar> g(n, k);
            for (long j = 0; j < k; ++j) {
                for (long i = 0; i < n; ++i) {
                    if constexpr (is_complex_v<Scalar>) {
                        const double re = normal(rng);
                        g(i, j) = Scalar(re, normal(rng));
                    } else {
                        g(i, j) = normal(rng);
                    }
                }
            }
            Eigen::HouseholderQR<Matrix<Scalar>> qr(g);
            Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(n, k);
            return reorthonormalize<Scalar>(q);
        }
        case BasisRecipe::explicit_basis: {
            if (!explicit_basis || explicit_basis->rows() != n || explicit_basis->cols() != k) {
                throw std::invalid_argument("explicit basis must be N x k");
            }
            Matrix<Scalar> v;
            if constexpr (is_complex_v<Scalar>) {
                v = *explicit_basis;
            } else {
                if (explicit_basis->imag().cwiseAbs().maxCoeff() > 0.0) {
                    throw std::invalid_argument("real ensemble needs a real explicit basis");
                }
                v = explicit_basis->real();
            }
            if (orthonormality_defect<Scalar>(v) > 1e-8) {
                throw std::invalid_argument("explicit basis is not orthonormal");
            }
            return reorthonormalize<Scalar>(v);
        }
    }
    throw std::invalid_argument("unknown basis recipe");
}

template <typename Scalar>
Matrix<Scalar> deform(const Matrix<Scalar>& h, const std::vector<double>& d, const Matrix<Scalar>& basis) {
    const long n = h.rows();
    if (h.cols() != n || basis.rows() != n || basis.cols() != static_cast<long>(d.size())) {
        throw std::invalid_argument("deform: dimension mismatch");
    }
    const Eigen::Map<const Eigen::VectorXd> dv(d.data(), static_cast<long>(d.size()));
    Matrix<Scalar> sum = h;
    sum.noalias() += basis * dv.cast<Scalar>().asDiagonal() * basis.adjoint();
    Matrix<Scalar> out = Scalar(0.5) * (sum + sum.adjoint());
    return out;
}

template <typename Scalar>
double orthonormality_defect(const Matrix<Scalar>& basis) {
    const Matrix<Scalar> gram = basis.adjoint() * basis;
    return (gram - Matrix<Scalar>::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
}

template Matrix<double> sample_wigner<double>(const EnsembleSpec&, std::uint64_t);
template Matrix<cplx> sample_wigner<cplx>(const EnsembleSpec&, std::uint64_t);
template Matrix<double> build_basis<double>(BasisRecipe, long, long, std::uint64_t,
                                            const std::optional<Eigen::MatrixXcd>&);
template Matrix<cplx> build_basis<cplx>(BasisRecipe, long, long, std::uint64_t,
                                        const std::optional<Eigen::MatrixXcd>&);
template Matrix<double> deform<double>(const Matrix<double>&, const std::vector<double>&,
                                       const Matrix<double>&);
template Matrix<cplx> deform<cplx>(const Matrix<cplx>&, const std::vector<double>&, const Matrix<cplx>&);
template double orthonormality_defect<double>(const Matrix<double>&);
template double orthonormality_defect<cplx>(const Matrix<cplx>&);

}  // namespace wigner::ensembles
