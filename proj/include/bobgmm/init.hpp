#pragma once

#include "bobgmm/rng.hpp"
#include "bobgmm/weighted_em.hpp"

#include <cstdint>
#include <vector>

namespace bobgmm {

struct KmeansResult {
    std::vector<int> labels;
    Matrix centers;  ///< K x d
    double inertia = 0.0;
};

/// K-means++ seeding followed by Lloyd iterations.
KmeansResult kmeans_pp(const Matrix& Y, int K, StreamRng& rng, int max_iter = 100);

/// Proportions, means and within-cluster scatter / n_k + 1e-6 I from hard
/// labels. Clusters with fewer than two points get the pooled covariance.
GmmParams params_from_labels(const Matrix& Y, const std::vector<int>& labels, int K);

struct InitResult {
    GmmParams params;
    std::vector<double> candidate_scores;  ///< log posterior per restart
    std::size_t chosen = 0;
};

/// Pool of K-means++ restarts, each polished by `polish_iter` unweighted EM
/// iterations; keeps the largest log posterior. Restart r uses stream
/// (init, r).
InitResult init_params(const Matrix& Y, int K, int n_restarts, std::uint64_t seed, const NiwDirichletPrior& prior,
                       int polish_iter = 10);

struct CvResult {
    double lambda = 1.0;
    double nu = 1.0;
    Matrix scores;  ///< validation log likelihood, lambda x nu; -inf where EM failed
    std::vector<int> train;
    std::vector<int> validation;
};

struct CvOptions {
    double concentration = 1.1;
    int n_restarts = 5;
    EmSettings em;
};

/// Single shuffled train/validation split; unweighted EM per (lambda, nu)
/// on the training rows; the pair maximizing validation log likelihood wins,
/// ties to the smaller lambda, then the smaller nu.
CvResult cv_select_lambda_nu(const Matrix& Y, int K, const std::vector<double>& grid_lambda,
                             const std::vector<double>& grid_nu, double split_fraction, std::uint64_t seed,
                             const CvOptions& options = {});

/// lambda in {0.1, 1, 10}; nu in {d+2, d+10, d+50}.
std::vector<double> default_lambda_grid();
std::vector<double> default_nu_grid(int d);

/// Fits on the training rows of a CV split for one (lambda, nu) pair.
GmmParams cv_fit(const Matrix& Y_train, int K, double lambda, double nu, std::uint64_t seed, const CvOptions& options);

Matrix select_rows(const Matrix& Y, const std::vector<int>& rows);

}  // namespace bobgmm
