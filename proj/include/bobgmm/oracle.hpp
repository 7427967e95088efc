#pragma once

#include "bobgmm/gmm.hpp"
#include "bobgmm/parallel.hpp"

#include <cstdint>
#include <vector>

namespace bobgmm {

/// n x K one-hot membership matrix.
struct LabelMatrix {
    Eigen::MatrixXi z;

    static LabelMatrix from_labels(const std::vector<int>& labels, int K);
    std::vector<int> labels() const;
    Vector counts() const;
};

void validate(const LabelMatrix& Z);

struct PosteriorHyper {
    std::vector<Vector> post_means;   ///< beta_hat_k
    std::vector<Matrix> post_scales;  ///< Psi_hat_k
    Vector post_lambdas;
    Vector post_dofs;
    Vector post_concs;

    int num_components() const { return static_cast<int>(post_means.size()); }
};

/// Conjugate update given known labels.
PosteriorHyper posterior_hyper(const Matrix& Y, const LabelMatrix& Z, const NiwDirichletPrior& prior);

/// Draw s: Sigma_k ~ IW, mu_k | Sigma_k ~ N(beta_hat, Sigma/lambda_hat) for each
/// k, then pi ~ Dir(a_hat); stream (oracle, 0, s).
GmmParams sample_posterior_draw(const PosteriorHyper& hyper, std::uint64_t seed, std::size_t s);

std::vector<GmmParams> sample_bayes_posterior(const PosteriorHyper& hyper, std::size_t S, std::uint64_t seed,
                                              Exec exec = Exec::parallel);

}  // namespace bobgmm
