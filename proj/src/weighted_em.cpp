#include "bobgmm/weighted_em.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace bobgmm {

namespace {

constexpr double kEmptyComponent = 1e-10;

double tau_at(const TemperingProfile& p, int t) { return (t + p.c * p.r) / p.r; }

double raw_temperature(const TemperingProfile& p, int t) {
    const double tau = tau_at(p, t);
    return 1.0 + std::pow(p.a, tau) + p.b * std::sin(tau) / tau;
}

bool in_range(const TemperingProfile& p) {
    return std::isfinite(p.a) && std::isfinite(p.b) && std::isfinite(p.c) && std::isfinite(p.r) && p.a >= 0.0 &&
           p.a < 1.0 && p.c > 0.0 && p.r > 0.0;
}

// Row i of u_i * L, with 0 * (-inf) read as 0.
Matrix scale_rows(const Matrix& log_terms, const Vector& u) {
    Matrix scaled(log_terms.rows(), log_terms.cols());
    for (Eigen::Index i = 0; i < log_terms.rows(); ++i) {
        if (u[i] == 0.0)
            scaled.row(i).setZero();
        else
            scaled.row(i) = u[i] * log_terms.row(i);
    }
    return scaled;
}

}  // namespace

WeightDraw WeightDraw::unit(int n, int K) {
    return WeightDraw{Vector::Ones(n), 1.0, Vector::Ones(K), Vector::Ones(K)};
}

void validate(const WeightDraw& w, int n, int K) {
    if (w.likelihood_weights.size() != n) throw DimensionError("likelihood weights do not match n");
    if (w.prior_weights_mu.size() != K || w.prior_weights_sigma.size() != K)
        throw DimensionError("prior weights do not match K");
    const auto bad = [](const Vector& v) { return !v.allFinite() || (v.array() < 0.0).any(); };
    if (bad(w.likelihood_weights) || bad(w.prior_weights_mu) || bad(w.prior_weights_sigma) ||
        !std::isfinite(w.prior_weight_pi) || w.prior_weight_pi < 0.0)
        throw InvalidArgument("weights must be finite and non-negative");
}

bool is_admissible(const TemperingProfile& profile) {
    if (!in_range(profile)) return false;
    // Once tau > |b| the oscillating term is bounded by 1 in magnitude.
    for (int t = 1; t < 100'000'000; ++t) {
        if (tau_at(profile, t) > std::abs(profile.b)) return true;
        if (!(raw_temperature(profile, t) > 0.0)) return false;
    }
    return false;
}

double temperature(const TemperingProfile& profile, int t) {
    if (!in_range(profile)) throw InvalidArgument("tempering profile needs a in [0,1), c > 0, r > 0");
    if (t < 1) throw InvalidArgument("tempering iteration index starts at 1");
    const double T = raw_temperature(profile, t);
    if (!(T > 0.0))
        throw InvalidArgument("tempering profile gives non-positive temperature at iteration " + std::to_string(t));
    return T;
}

double weighted_log_prior(const GmmParams& params, const NiwDirichletPrior& prior, const WeightDraw& w) {
    check_compatible(params, prior);
    const int d = params.dim();
    double total = 0.0;
    for (int k = 0; k < params.num_components(); ++k) {
        const double pi_coef = w.prior_weight_pi * (prior.concentrations[k] - 1.0);
        if (pi_coef != 0.0) total += pi_coef * std::log(params.weights[k]);

        Eigen::LLT<Matrix> llt(params.covs[k]);
        if (llt.info() != Eigen::Success) throw NotPositiveDefinite("covariance is not positive definite");
        const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        if (w.prior_weights_sigma[k] != 0.0)
            total -= w.prior_weights_sigma[k] * (((prior.dofs[k] + d) / 2.0 + 1.0) * logdet +
                                                 0.5 * llt.solve(prior.scale_mats[k]).trace());
        if (w.prior_weights_mu[k] != 0.0) {
            const Vector dev = params.means[k] - prior.prior_means[k];
            total -= w.prior_weights_mu[k] * 0.5 * prior.precision_scales[k] * dev.dot(llt.solve(dev));
        }
    }
    if (!std::isfinite(total)) throw NonFiniteResult("weighted log-prior is not finite");
    return total;
}

double weighted_log_likelihood(const Matrix& Y, const GmmParams& params, const Vector& u) {
    if (u.size() != Y.rows()) throw DimensionError("likelihood weights do not match n");
    const double v = row_log_sum_exp(scale_rows(component_log_terms(Y, params), u)).sum();
    if (!std::isfinite(v)) throw NonFiniteResult("weighted log-likelihood is not finite");
    return v;
}

double weighted_log_posterior(const Matrix& Y, const GmmParams& params, const NiwDirichletPrior& prior,
                              const WeightDraw& w) {
    return weighted_log_likelihood(Y, params, w.likelihood_weights) + weighted_log_prior(params, prior, w);
}

Matrix e_step_from_terms(const Matrix& log_terms, const Vector& u, double temperature) {
    if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
    if (u.size() != log_terms.rows()) throw DimensionError("likelihood weights do not match n");
    // softmax_k(log q_ik / T) equals softmax_k(u_i L_ik / T) because log q_ik
    // differs from u_i L_ik by a per-row constant.
    Matrix Q = scale_rows(log_terms, u) / temperature;
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        const double m = Q.row(i).maxCoeff();
        Q.row(i) = (Q.row(i).array() - m).exp();
        Q.row(i) /= Q.row(i).sum();
    }
    if (!Q.allFinite()) throw NonFiniteResult("responsibilities are not finite");
    return Q;
}

Matrix e_step(const Matrix& Y, const GmmParams& params, const Vector& u, double temperature) {
    return e_step_from_terms(component_log_terms(Y, params), u, temperature);
}

GmmParams m_step(const Matrix& Y, const Matrix& responsibilities, const WeightDraw& w,
                 const NiwDirichletPrior& prior, CovarianceUpdate update) {
    const Eigen::Index n = Y.rows();
    const int d = static_cast<int>(Y.cols());
    const int K = prior.num_components();
    if (responsibilities.rows() != n || responsibilities.cols() != K)
        throw DimensionError("responsibility matrix must be n x K");
    if (prior.dim() != d) throw DimensionError("prior dimension does not match data");
    if (w.likelihood_weights.size() != n) throw DimensionError("likelihood weights do not match n");

    const double extra = update == CovarianceUpdate::surrogate_mode ? 2.0 : 1.0;
    GmmParams next;
    next.weights.resize(K);
    next.means.resize(K);
    next.covs.resize(K);
    Vector counts(K);

    for (int k = 0; k < K; ++k) {
        const Vector uq = w.likelihood_weights.cwiseProduct(responsibilities.col(k));
        const double n_k = uq.sum();
        counts[k] = n_k;

        const double lambda_t = w.prior_weights_mu[k] * prior.precision_scales[k];
        const double nu_t = w.prior_weights_sigma[k] * (prior.dofs[k] + d + 2.0) - 2.0 - d;
        Matrix psi_bar = w.prior_weights_sigma[k] * prior.scale_mats[k];
        Vector beta_bar = prior.prior_means[k];
        double nu_bar = nu_t;

        if (n_k >= kEmptyComponent) {
            const Vector ybar = Y.transpose() * uq / n_k;
            const Matrix centered = Y.rowwise() - ybar.transpose();
            const double lambda_bar = lambda_t + n_k;
            const Vector dev = ybar - prior.prior_means[k];
            psi_bar.noalias() += centered.transpose() * uq.asDiagonal() * centered;
            psi_bar.noalias() += (lambda_t * n_k / lambda_bar) * dev * dev.transpose();
            beta_bar = (lambda_t * prior.prior_means[k] + n_k * ybar) / lambda_bar;
            nu_bar += n_k;
        }

        const double divisor = nu_bar + d + extra;
        if (!(divisor > 0.0))
            throw InvalidDof("component " + std::to_string(k + 1) + ": covariance mode needs nu_bar + d + " +
                             std::to_string(static_cast<int>(extra)) + " > 0, got " + std::to_string(divisor));
        Matrix sigma = psi_bar / divisor;
        sigma = 0.5 * (sigma + sigma.transpose()).eval();
        Eigen::LLT<Matrix> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("updated covariance of component " + std::to_string(k + 1) +
                                      " is not positive definite");
        next.covs[k] = std::move(sigma);
        next.means[k] = std::move(beta_bar);
    }

    Vector a_bar(K);
    for (int k = 0; k < K; ++k) a_bar[k] = (prior.concentrations[k] - 1.0) * w.prior_weight_pi + 1.0 + counts[k];
    const double denom = a_bar.sum() - K;
    if (!(denom > 0.0)) throw DegeneratePosterior("Dirichlet mode undefined: sum(a_bar) - K <= 0");
    next.weights = (a_bar.array() - 1.0) / denom;
    if ((next.weights.array() < 0.0).any()) throw DegeneratePosterior("Dirichlet mode has a negative weight");
    return next;
}

EmResult run_weighted_em(const Matrix& Y, const WeightDraw& w, const NiwDirichletPrior& prior,
                         const GmmParams& init, const EmSettings& settings) {
    const int K = prior.num_components();
    validate(w, static_cast<int>(Y.rows()), K);
    check_compatible(init, prior);
    if (settings.max_iter < 1) throw InvalidArgument("max_iter must be positive");
    if (!(settings.tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (settings.profile && !is_admissible(*settings.profile)) throw InvalidArgument("tempering profile rejected");

    const Vector& u = w.likelihood_weights;
    EmResult result{init, {}};
    Matrix log_terms;
    double objective = 0.0;
    try {
        log_terms = component_log_terms(Y, result.params);
        objective = row_log_sum_exp(scale_rows(log_terms, u)).sum() + weighted_log_prior(result.params, prior, w);
    } catch (const Error& e) {
        throw EmFailure(0, e.what());
    }
    if (!std::isfinite(objective)) throw EmFailure(0, "objective at the initial point is not finite");

    auto& diag = result.diagnostics;
    for (int t = 1; t <= settings.max_iter; ++t) {
        double next_objective = 0.0;
        try {
            const double T = settings.profile ? temperature(*settings.profile, t) : 1.0;
            const Matrix Q = e_step_from_terms(log_terms, u, T);
            result.params = m_step(Y, Q, w, prior, settings.covariance_update);
            log_terms = component_log_terms(Y, result.params);
            next_objective =
                row_log_sum_exp(scale_rows(log_terms, u)).sum() + weighted_log_prior(result.params, prior, w);
        } catch (const Error& e) {
            throw EmFailure(t, e.what());
        }
        if (!std::isfinite(next_objective)) throw EmFailure(t, "weighted log posterior is not finite");
        if (settings.record_trace) diag.trace.push_back(next_objective);
        const double change = std::abs(next_objective - objective) / (1.0 + std::abs(objective));
        objective = next_objective;
        diag.iterations = t;
        if (change < settings.tol) {
            diag.converged = true;
            break;
        }
    }
    diag.log_posterior = objective;
    return result;
}

std::vector<TemperingProfile> default_tempering_grid() {
    std::vector<TemperingProfile> grid;
    for (double a : {0.0, 0.3, 0.6, 0.9})
        for (double b : {0.0, 1.0, 3.0})
            for (double c : {1.0, 5.0})
                for (double r : {2.0, 8.0}) grid.push_back({a, b, c, r});
    return grid;
}

TemperingSelection tune_tempering(const Matrix& Y, const NiwDirichletPrior& prior,
                                  const std::vector<TemperingProfile>& grid, const GmmParams& init,
                                  const EmSettings& settings) {
    if (grid.empty()) throw InvalidArgument("tempering grid is empty");
    const WeightDraw unit = WeightDraw::unit(static_cast<int>(Y.rows()), prior.num_components());

    TemperingSelection sel;
    sel.scores.resize(grid.size());
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    std::string last_error = "no admissible profile in grid";
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!is_admissible(grid[g])) {
            std::clog << "warning: skipping tempering profile " << g << " (non-positive temperature)\n";
            continue;
        }
        EmSettings run = settings;
        run.profile = grid[g];
        try {
            const EmResult fit = run_weighted_em(Y, unit, prior, init, run);
            const double score = log_unnorm_posterior(Y, fit.params, prior);
            sel.scores[g] = score;
            if (score > best) {
                best = score;
                sel.profile = grid[g];
                sel.index = g;
                found = true;
            }
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (!found) throw Error("tempering tuning failed for every profile: " + last_error);
    return sel;
}

}  // namespace bobgmm
