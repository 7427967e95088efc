#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace bobgmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Parameters of a K-component Gaussian mixture in d dimensions.
struct GmmParams {
    Vector weights;              ///< mixing proportions, on the simplex
    std::vector<Vector> means;   ///< K vectors of length d
    std::vector<Matrix> covs;    ///< K symmetric positive-definite d x d

    int num_components() const { return static_cast<int>(weights.size()); }
    int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
};

/// Normal-inverse-Wishart prior per component plus a Dirichlet on the
/// weights:  mu_k | Sigma_k ~ N(beta_k, Sigma_k / lambda_k),
/// Sigma_k ~ IW(nu_k, Psi_k) (scale Psi_k), pi ~ Dir(a_1..a_K).
struct NiwDirichletPrior {
    Vector concentrations;           ///< a_k > 0
    std::vector<Vector> prior_means; ///< beta_k
    Vector precision_scales;         ///< lambda_k > 0
    Vector dofs;                     ///< nu_k
    std::vector<Matrix> scale_mats;  ///< Psi_k

    int num_components() const { return static_cast<int>(concentrations.size()); }
    int dim() const { return prior_means.empty() ? 0 : static_cast<int>(prior_means.front().size()); }

    /// beta_k = 0, Psi_k = I, shared a, lambda and nu.
    static NiwDirichletPrior symmetric(int K, int d, double a, double lambda, double nu);
};

/// Throws DimensionError / InvalidArgument / NotPositiveDefinite.
void validate(const GmmParams& params);
void validate(const NiwDirichletPrior& prior);
void check_compatible(const GmmParams& params, const NiwDirichletPrior& prior);

/// n x K matrix with entries log pi_k + log N(y_i; mu_k, Sigma_k).
Matrix component_log_terms(const Matrix& Y, const GmmParams& params);

/// Log-sum-exp of each row.
Vector row_log_sum_exp(const Matrix& M);

/// sum_i log sum_k pi_k N(y_i; mu_k, Sigma_k).
double log_likelihood(const Matrix& Y, const GmmParams& params);

/// Unnormalized log NIW-Dirichlet density.
double log_prior(const GmmParams& params, const NiwDirichletPrior& prior);

double log_unnorm_posterior(const Matrix& Y, const GmmParams& params, const NiwDirichletPrior& prior);

// Flat coordinate layout: (pi_1..pi_{K-1}), then for each component the
// mean entries followed by the lower triangle of the covariance, row by
// row (Sigma(0,0), Sigma(1,0), Sigma(1,1), Sigma(2,0), ...).

constexpr int flat_size(int K, int d) { return (K - 1) + d * K + K * d * (d + 1) / 2; }

Vector flatten(const GmmParams& params);
GmmParams unflatten(const Eigen::Ref<const Vector>& v, int K, int d);

/// Column names for the flat layout, e.g. "pi_1", "mu_2_3", "sigma_1_2_1".
std::vector<std::string> flat_labels(int K, int d);

}  // namespace bobgmm
