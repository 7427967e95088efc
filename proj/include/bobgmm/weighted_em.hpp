#pragma once

#include "bobgmm/errors.hpp"
#include "bobgmm/gmm.hpp"

#include <optional>
#include <vector>

namespace bobgmm {

/// One realization of the random weights: u on the likelihood terms and
/// the prior weights on the Dirichlet, mean and covariance blocks.
struct WeightDraw {
    Vector likelihood_weights;     ///< u_i >= 0, length n
    double prior_weight_pi = 1.0;  ///< weight on the Dirichlet term
    Vector prior_weights_mu;       ///< length K
    Vector prior_weights_sigma;    ///< length K

    /// All weights equal to one: the ordinary (unweighted) MAP problem.
    static WeightDraw unit(int n, int K);
};

void validate(const WeightDraw& w, int n, int K);

/// T_t = 1 + a^tau + b sin(tau) / tau with tau = (t + c r) / r.
struct TemperingProfile {
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;
    double r = 1.0;
};

/// True when the parameters are in range and T_t > 0 for every t >= 1.
bool is_admissible(const TemperingProfile& profile);

/// Temperature at EM iteration t (1-based). Throws InvalidArgument for a
/// rejected profile or a non-positive temperature.
double temperature(const TemperingProfile& profile, int t);

/// How the covariance block of the M-step is resolved.
///  - surrogate_mode: Sigma = Psi_bar / (nu_bar + d + 2), the joint maximizer
///    of the expected complete-data log posterior over (mu_k, Sigma_k).
///  - marginal_mode:  Sigma = Psi_bar / (nu_bar + d + 1), the mode of the
///    inverse-Wishart obtained after integrating mu_k out.
enum class CovarianceUpdate { surrogate_mode, marginal_mode };

struct EmSettings {
    int max_iter = 500;
    double tol = 1e-8;  ///< on |delta f| / (1 + |f|) of the weighted log posterior
    std::optional<TemperingProfile> profile;  ///< none means T_t = 1
    CovarianceUpdate covariance_update = CovarianceUpdate::surrogate_mode;
    bool record_trace = false;
};

struct EmDiagnostics {
    int iterations = 0;
    double log_posterior = 0.0;  ///< weighted objective at the returned point
    bool converged = false;
    std::vector<double> trace;   ///< objective after each iteration, when requested
};

struct EmResult {
    GmmParams params;
    EmDiagnostics diagnostics;
};

/// An M-step (or density evaluation) failure inside run_weighted_em.
class EmFailure : public Error {
public:
    EmFailure(int iteration, const std::string& what)
        : Error("EM iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// Prior term with block weights:
///   sum_k { w_pi (a_k-1) log pi_k
///           - w_sigma_k [((nu_k+d)/2 + 1) log|Sigma_k| + tr(Psi_k Sigma_k^-1)/2]
///           - w_mu_k (lambda_k/2) (mu_k-beta_k)' Sigma_k^-1 (mu_k-beta_k) }
double weighted_log_prior(const GmmParams& params, const NiwDirichletPrior& prior, const WeightDraw& w);

/// sum_i log sum_k [pi_k N(y_i; mu_k, Sigma_k)]^{u_i}; the marginal of the
/// weighted complete-data density that the E-step is the posterior of.
double weighted_log_likelihood(const Matrix& Y, const GmmParams& params, const Vector& u);

double weighted_log_posterior(const Matrix& Y, const GmmParams& params, const NiwDirichletPrior& prior,
                              const WeightDraw& w);

/// Tempered responsibilities, n x K.
Matrix e_step(const Matrix& Y, const GmmParams& params, const Vector& u, double temperature);

/// Same, from precomputed component_log_terms().
Matrix e_step_from_terms(const Matrix& log_terms, const Vector& u, double temperature);

/// Closed-form maximizer of the weighted surrogate given responsibilities.
/// Components whose weighted count falls below 1e-10 revert to their
/// (weighted) prior mode.
GmmParams m_step(const Matrix& Y, const Matrix& responsibilities, const WeightDraw& w,
                 const NiwDirichletPrior& prior,
                 CovarianceUpdate update = CovarianceUpdate::surrogate_mode);

EmResult run_weighted_em(const Matrix& Y, const WeightDraw& w, const NiwDirichletPrior& prior,
                         const GmmParams& init, const EmSettings& settings);

/// a in {0, .3, .6, .9}, b in {0, 1, 3}, c in {1, 5}, r in {2, 8}.
std::vector<TemperingProfile> default_tempering_grid();

struct TemperingSelection {
    TemperingProfile profile;
    std::size_t index = 0;
    std::vector<std::optional<double>> scores;  ///< unweighted log posterior per grid entry
};

/// Runs unweighted EM once per admissible profile from the same init and
/// keeps the one with the largest final log posterior (first on ties).
TemperingSelection tune_tempering(const Matrix& Y, const NiwDirichletPrior& prior,
                                  const std::vector<TemperingProfile>& grid, const GmmParams& init,
                                  const EmSettings& settings);

}  // namespace bobgmm
