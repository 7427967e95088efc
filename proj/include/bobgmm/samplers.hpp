#pragma once

#include "bobgmm/gmm.hpp"
#include "bobgmm/rng.hpp"

namespace bobgmm {

double sample_standard_normal(StreamRng& rng);
double sample_gamma(double shape, StreamRng& rng);  ///< unit scale
double sample_chi_squared(double dof, StreamRng& rng);

/// Sigma ~ IW(nu, Psi), E[Sigma] = Psi / (nu - d - 1). Bartlett factor of
/// Wishart(nu, Psi^-1) inverted through the Cholesky factor of Psi.
Matrix sample_inverse_wishart(double nu, const Matrix& Psi, StreamRng& rng);

Vector sample_mvn(const Vector& mean, const Matrix& cov, StreamRng& rng);

Vector sample_dirichlet(const Vector& concentrations, StreamRng& rng);

}  // namespace bobgmm
