#include "bobgmm/samplers.hpp"

#include "bobgmm/errors.hpp"

#include <cmath>
#include <random>

namespace bobgmm {

double sample_standard_normal(StreamRng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double sample_gamma(double shape, StreamRng& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw InvalidArgument("gamma shape must be positive");
    return std::gamma_distribution<double>(shape, 1.0)(rng);
}

double sample_chi_squared(double dof, StreamRng& rng) { return 2.0 * sample_gamma(0.5 * dof, rng); }

Matrix sample_inverse_wishart(double nu, const Matrix& Psi, StreamRng& rng) {
    const auto d = Psi.rows();
    if (Psi.cols() != d || d == 0) throw DimensionError("inverse-Wishart scale must be square");
    if (!(nu > static_cast<double>(d) - 1.0)) throw InvalidDof("inverse-Wishart needs nu > d - 1");
    Eigen::LLT<Matrix> llt(Psi);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("inverse-Wishart scale is not positive definite");
    const Matrix L = llt.matrixL();

    Matrix A = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        A(i, i) = std::sqrt(sample_chi_squared(nu - static_cast<double>(i), rng));
        for (Eigen::Index j = 0; j < i; ++j) A(i, j) = sample_standard_normal(rng);
    }
    // Sigma = L A^-T A^-1 L'.
    const Matrix X = A.triangularView<Eigen::Lower>().solve(L.transpose());
    Matrix S = X.transpose() * X;
    S = 0.5 * (S + S.transpose()).eval();
    return S;
}

Vector sample_mvn(const Vector& mean, const Matrix& cov, StreamRng& rng) {
    const auto d = mean.size();
    if (cov.rows() != d || cov.cols() != d) throw DimensionError("MVN covariance has wrong shape");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("MVN covariance is not positive definite");
    Vector z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = sample_standard_normal(rng);
    return mean + llt.matrixL() * z;
}

Vector sample_dirichlet(const Vector& concentrations, StreamRng& rng) {
    if (concentrations.size() == 0) throw DimensionError("Dirichlet needs at least one concentration");
    Vector g(concentrations.size());
    for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = sample_gamma(concentrations(k), rng);
    const double total = g.sum();
    if (!(total > 0.0)) throw NonFiniteResult("Dirichlet gamma draws underflowed");
    return g / total;
}

}  // namespace bobgmm
