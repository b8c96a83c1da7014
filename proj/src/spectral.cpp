#include "wigner/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wigner::spectral {

namespace {

template <typename Scalar>
double hermitian_defect(const Matrix<Scalar>& h) {
    double worst = 0.0;
    const long n = h.rows();
    for (long j = 0; j < n; ++j) {
        for (long i = j; i < n; ++i) {
            worst = std::max(worst, std::abs(h(i, j) - Eigen::numext::conj(h(j, i))));
        }
    }
    return worst;
}

template <typename Scalar>
bool lexicographically_less(const Matrix<Scalar>& u, long a, long b) {
    for (long i = 0; i < u.rows(); ++i) {
        const double ra = std::real(u(i, a));
        const double rb = std::real(u(i, b));
        if (ra != rb) return ra < rb;
        const double ia = std::imag(u(i, a));
        const double ib = std::imag(u(i, b));
        if (ia != ib) return ia < ib;
    }
    return a < b;
}

}  // namespace

template <typename Scalar>
Tridiagonal<Scalar> householder_tridiagonalize(Matrix<Scalar> a, bool want_q) {
    const long n = a.rows();
    Vector<Scalar> tau = Vector<Scalar>::Zero(n);
    Vector<Scalar> work(n);
    Eigen::VectorXd sub = Eigen::VectorXd::Zero(n);

    for (long i = 0; i + 1 < n; ++i) {
        const long rs = n - i - 1;
        auto x = a.col(i).tail(rs);

        // Reflector H = I - t v v^*, v = (1, essential), with H^* x = beta e_1.
        const Scalar alpha = x(0);
        const double tail_norm2 = rs > 1 ? x.tail(rs - 1).squaredNorm() : 0.0;
        Scalar t(0);
        double beta = std::real(alpha);
        if (tail_norm2 > std::numeric_limits<double>::min() || std::imag(alpha) != 0.0) {
            beta = std::sqrt(std::norm(alpha) + tail_norm2);
            if (std::real(alpha) >= 0.0) beta = -beta;
            if (rs > 1) x.tail(rs - 1) /= (alpha - beta);
            t = Eigen::numext::conj((beta - alpha) / beta);
        } else if (rs > 1) {
            x.tail(rs - 1).setZero();
        }
        x(0) = Scalar(1);

        // A22 <- H^* A22 H as a symmetric rank-2 update of the lower triangle.
        auto a22 = a.bottomRightCorner(rs, rs);
        auto w = work.head(rs);
        w.noalias() = a22.template selfadjointView<Eigen::Lower>() * (Eigen::numext::conj(t) * x);
        const Scalar correction = Eigen::numext::conj(t) * (-0.5) * w.dot(x);
        w += correction * x;
        a22.template selfadjointView<Eigen::Lower>().rankUpdate(x, w, Scalar(-1));

        tau(i) = t;
        sub(i) = beta;
        x(0) = Scalar(beta);
    }

    Tridiagonal<Scalar> out;
    out.diagonal = a.diagonal().real();
    out.subdiagonal = sub;
    if (want_q) {
        out.q = Matrix<Scalar>::Identity(n, n);
        Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row(n);
        for (long i = n - 2; i >= 0; --i) {
            const long rs = n - i - 1;
            Vector<Scalar> v = a.col(i).tail(rs);
            v(0) = Scalar(1);
            auto block = out.q.bottomRightCorner(rs, rs);
            auto r = row.head(rs);
            r.noalias() = v.adjoint() * block;
            block.noalias() -= (Eigen::numext::conj(tau(i)) * v) * r;
        }
    }
    return out;
}

template <typename Scalar>
void implicit_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Matrix<Scalar>* z) {
    const long n = d.size();
    if (e.size() != n) throw std::invalid_argument("implicit_ql: subdiagonal must have size n");
    if (n == 0) return;
    e(n - 1) = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    const long rows = z ? z->rows() : 0;

    for (long l = 0; l < n; ++l) {
        int iterations = 0;
        long m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d(m)) + std::abs(d(m + 1));
                if (std::abs(e(m)) <= eps * dd) break;
            }
            if (m == l) break;
            if (++iterations > 60) throw std::runtime_error("implicit_ql: no convergence");

            // Wilkinson-type shift from the leading 2x2 block.
            double g = (d(l + 1) - d(l)) / (2.0 * e(l));
            double r = std::hypot(g, 1.0);
            g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            long i = m - 1;
            bool underflow = false;
            for (; i >= l; --i) {
                const double f = s * e(i);
                const double b = c * e(i);
                r = std::hypot(f, g);
                e(i + 1) = r;
                if (r == 0.0) {
                    d(i + 1) -= p;
                    e(m) = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d(i + 1) - p;
                r = (d(i) - g) * s + 2.0 * c * b;
                p = s * r;
                d(i + 1) = g + p;
                g = c * r - b;
                if (z) {
                    Scalar* zi = z->col(i).data();
                    Scalar* zj = z->col(i + 1).data();
                    for (long k = 0; k < rows; ++k) {
                        const Scalar t = zj[k];
                        zj[k] = s * zi[k] + c * t;
                        zi[k] = c * zi[k] - s * t;
                    }
                }
            }
            if (underflow) continue;
            d(l) -= p;
            e(l) = g;
            e(m) = 0.0;
        } while (m != l);
    }
}

template <typename Scalar>
SpectralDecomposition<Scalar> eigh(const Matrix<Scalar>& h, EigenMode mode) {
    const long n = h.rows();
    if (h.cols() != n) throw NotHermitianError("eigh: matrix must be square");
    const double scale = std::max(1.0, n > 0 ? h.cwiseAbs().maxCoeff() : 0.0);
    if (hermitian_defect(h) > 1e-12 * scale) throw NotHermitianError("eigh: matrix is not Hermitian");

    SpectralDecomposition<Scalar> dec;
    if (n == 0) return dec;
    const bool vectors = mode == EigenMode::with_vectors;
    Tridiagonal<Scalar> tri = householder_tridiagonalize<Scalar>(h, vectors);
    implicit_ql<Scalar>(tri.diagonal, tri.subdiagonal, vectors ? &tri.q : nullptr);

    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0L);
    const Eigen::VectorXd& values = tri.diagonal;
    std::sort(order.begin(), order.end(), [&](long a, long b) {
        if (values(a) != values(b)) return values(a) < values(b);
        return vectors ? lexicographically_less(tri.q, a, b) : a < b;
    });

    dec.eigenvalues.resize(n);
    for (long i = 0; i < n; ++i) dec.eigenvalues(i) = values(order[i]);
    if (vectors) {
        dec.eigenvectors.resize(n, n);
        for (long i = 0; i < n; ++i) dec.eigenvectors.col(i) = tri.q.col(order[i]);
    }
    return dec;
}

template <typename Scalar>
cplx resolvent_from_overlaps(const Eigen::VectorXd& eigenvalues, const Vector<Scalar>& a,
                             const Vector<Scalar>& b, cplx z) {
    cplx sum(0.0, 0.0);
    for (long k = 0; k < eigenvalues.size(); ++k) {
        sum += cplx(Eigen::numext::conj(a(k)) * b(k)) / (eigenvalues(k) - z);
    }
    return sum;
}

template <typename Scalar>
cplx resolvent_bilinear(const SpectralDecomposition<Scalar>& dec, const Vector<Scalar>& v,
                        const Vector<Scalar>& w, cplx z) {
    if (!dec.has_vectors()) throw std::invalid_argument("resolvent_bilinear: needs eigenvectors");
    if (v.size() != dec.size() || w.size() != dec.size()) {
        throw std::invalid_argument("resolvent_bilinear: dimension mismatch");
    }
    if (z.imag() == 0.0) {
        const double gap = (dec.eigenvalues.array() - z.real()).abs().minCoeff();
        if (gap <= 1e-13) throw PoleError("resolvent_bilinear: z is an eigenvalue");
    }
    const Vector<Scalar> a = dec.eigenvectors.adjoint() * v;
    const Vector<Scalar> b = dec.eigenvectors.adjoint() * w;
    return resolvent_from_overlaps<Scalar>(dec.eigenvalues, a, b, z);
}

template <typename Scalar>
double isotropic_residual(const SpectralDecomposition<Scalar>& dec, const Vector<Scalar>& v,
                          const Vector<Scalar>& w, cplx z) {
    if (!(z.imag() > 0.0)) throw DomainError("isotropic_residual: requires Im z > 0");
    const cplx g = resolvent_bilinear(dec, v, w, z);
    return std::abs(g - theory::stieltjes(z) * cplx(v.dot(w)));
}

template <typename Scalar>
std::vector<double> deformed_eigenvalues_via_det(const SpectralDecomposition<Scalar>& dec,
                                                 const Matrix<Scalar>& basis,
                                                 const std::vector<double>& d, double lower,
                                                 double upper, double grid_step) {
    const long n = dec.size();
    const long k = static_cast<long>(d.size());
    if (!dec.has_vectors()) throw std::invalid_argument("det identity: needs eigenvectors");
    if (basis.rows() != n || basis.cols() != k || k == 0) {
        throw std::invalid_argument("det identity: basis must be N x k");
    }
    for (double x : d) {
        if (x == 0.0) throw std::invalid_argument("det identity: D must be invertible");
    }
    if (!(lower < upper)) throw std::invalid_argument("det identity: empty interval");

    const Eigen::VectorXd& lambda = dec.eigenvalues;
    const double scale = std::max({1.0, std::abs(lambda(0)), std::abs(lambda(n - 1))});
    const double pole_tol = 1e-13 * scale;
    for (long a = 0; a < n; ++a) {
        if (std::abs(lambda(a) - lower) <= pole_tol || std::abs(lambda(a) - upper) <= pole_tol) {
            throw BracketingError("det identity: interval endpoint lies on an eigenvalue of H");
        }
    }

    const Matrix<Scalar> w = dec.eigenvectors.adjoint() * basis;
    Matrix<Scalar> d_inverse = Matrix<Scalar>::Zero(k, k);
    for (long i = 0; i < k; ++i) d_inverse(i, i) = Scalar(1.0 / d[i]);

    Eigen::VectorXd weights(n);
    Matrix<Scalar> m(k, k);
    auto det_at = [&](double mu) {
        weights = (lambda.array() - mu).inverse();
        m.noalias() = w.adjoint() * weights.cast<Scalar>().asDiagonal() * w;
        m += d_inverse;
        if (k == 1) return std::real(m(0, 0));
        return std::real(Eigen::PartialPivLU<Matrix<Scalar>>(m).determinant());
    };

    // Pole-free segments; flags mark which ends are poles.
    std::vector<double> cuts{lower};
    for (long a = 0; a < n; ++a) {
        if (lambda(a) > lower && lambda(a) < upper) cuts.push_back(lambda(a));
    }
    cuts.push_back(upper);
    const double step = grid_step > 0.0 ? grid_step : (upper - lower) / 1000.0;

    std::vector<double> roots;
    std::vector<double> points;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s];
        const double b = cuts[s + 1];
        if (b - a <= 2.0 * pole_tol) continue;
        const bool a_pole = s > 0;
        const bool b_pole = s + 2 < cuts.size();
        points.clear();
        const long count = std::max(2L, static_cast<long>(std::ceil((b - a) / step)));
        for (long j = a_pole ? 1 : 0; j <= (b_pole ? count - 1 : count); ++j) {
            points.push_back(a + (b - a) * static_cast<double>(j) / static_cast<double>(count));
        }
        const double reach = std::min(step, 0.5 * (b - a));
        for (double delta = 1e-14 * scale; delta < reach; delta *= 4.0) {
            if (a_pole) points.push_back(a + delta);
            if (b_pole) points.push_back(b - delta);
        }
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());

        double x0 = points.front();
        double f0 = det_at(x0);
        if (f0 == 0.0) roots.push_back(x0);
        for (std::size_t j = 1; j < points.size(); ++j) {
            const double x1 = points[j];
            const double f1 = det_at(x1);
            if (f1 == 0.0) {
                roots.push_back(x1);
            } else if ((f0 < 0.0) != (f1 < 0.0) && f0 != 0.0) {
                double lo = x0;
                double hi = x1;
                double flo = f0;
                for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    const double fm = det_at(mid);
                    if (fm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                roots.push_back(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

double interlacing_violation(const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu, long n_positive,
                             long n_negative) {
    const long n = lambda.size();
    if (mu.size() != n) throw std::invalid_argument("interlacing_violation: size mismatch");
    double worst = 0.0;
    for (long a = 0; a < n; ++a) {
        if (a - n_negative >= 0) worst = std::max(worst, lambda(a - n_negative) - mu(a));
        if (a + n_positive < n) worst = std::max(worst, mu(a) - lambda(a + n_positive));
    }
    return worst;
}

template <typename Scalar>
double eigen_residual(const Matrix<Scalar>& h, const SpectralDecomposition<Scalar>& dec) {
    const Matrix<Scalar> r = h * dec.eigenvectors -
                             dec.eigenvectors * dec.eigenvalues.template cast<Scalar>().asDiagonal();
    return r.colwise().norm().maxCoeff();
}

template <typename Scalar>
double orthogonality_residual(const SpectralDecomposition<Scalar>& dec) {
    return ensembles::orthonormality_defect<Scalar>(dec.eigenvectors);
}

#define WIGNER_SPECTRAL_INSTANTIATE(S)                                                             \
    template Tridiagonal<S> householder_tridiagonalize<S>(Matrix<S>, bool);                        \
    template void implicit_ql<S>(Eigen::VectorXd&, Eigen::VectorXd&, Matrix<S>*);                 \
    template SpectralDecomposition<S> eigh<S>(const Matrix<S>&, EigenMode);                        \
    template cplx resolvent_from_overlaps<S>(const Eigen::VectorXd&, const Vector<S>&,             \
                                             const Vector<S>&, cplx);                              \
    template cplx resolvent_bilinear<S>(const SpectralDecomposition<S>&, const Vector<S>&,         \
                                        const Vector<S>&, cplx);                                   \
    template double isotropic_residual<S>(const SpectralDecomposition<S>&, const Vector<S>&,       \
                                          const Vector<S>&, cplx);                                 \
    template std::vector<double> deformed_eigenvalues_via_det<S>(                                  \
        const SpectralDecomposition<S>&, const Matrix<S>&, const std::vector<double>&, double,     \
        double, double);                                                                           \
    template double eigen_residual<S>(const Matrix<S>&, const SpectralDecomposition<S>&);          \
    template double orthogonality_residual<S>(const SpectralDecomposition<S>&);

WIGNER_SPECTRAL_INSTANTIATE(double)
WIGNER_SPECTRAL_INSTANTIATE(cplx)

}  // namespace wigner::spectral
