#include "bobgmm/gmm.hpp"

#include "bobgmm/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bobgmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::LLT<Matrix> factor_or_throw(const Matrix& m, const char* what, int k) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite(std::string(what) + " of component " + std::to_string(k + 1) +
                                  " is not positive definite");
    return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

NiwDirichletPrior NiwDirichletPrior::symmetric(int K, int d, double a, double lambda, double nu) {
    NiwDirichletPrior p;
    p.concentrations = Vector::Constant(K, a);
    p.prior_means.assign(K, Vector::Zero(d));
    p.precision_scales = Vector::Constant(K, lambda);
    p.dofs = Vector::Constant(K, nu);
    p.scale_mats.assign(K, Matrix::Identity(d, d));
    return p;
}

void validate(const GmmParams& params) {
    const int K = params.num_components();
    const int d = params.dim();
    if (K < 2) throw InvalidArgument("mixture needs at least two components");
    if (d < 1) throw DimensionError("mixture dimension must be positive");
    if (static_cast<int>(params.means.size()) != K || static_cast<int>(params.covs.size()) != K)
        throw DimensionError("weights, means and covs disagree on K");
    if ((params.weights.array() < 0.0).any() || !params.weights.allFinite())
        throw InvalidArgument("mixture weights must be finite and non-negative");
    if (std::abs(params.weights.sum() - 1.0) > 1e-12) throw InvalidArgument("mixture weights must sum to one");
    for (int k = 0; k < K; ++k) {
        if (params.means[k].size() != d || params.covs[k].rows() != d || params.covs[k].cols() != d)
            throw DimensionError("component " + std::to_string(k + 1) + " has inconsistent dimension");
        factor_or_throw(params.covs[k], "covariance", k);
    }
}

void validate(const NiwDirichletPrior& prior) {
    const int K = prior.num_components();
    const int d = prior.dim();
    if (K < 1 || d < 1) throw DimensionError("empty prior");
    if (static_cast<int>(prior.prior_means.size()) != K || prior.precision_scales.size() != K ||
        prior.dofs.size() != K || static_cast<int>(prior.scale_mats.size()) != K)
        throw DimensionError("prior hyperparameter blocks disagree on K");
    if ((prior.concentrations.array() <= 0.0).any()) throw InvalidArgument("Dirichlet concentrations must be positive");
    if ((prior.precision_scales.array() <= 0.0).any()) throw InvalidArgument("precision scales must be positive");
    for (int k = 0; k < K; ++k) {
        if (prior.prior_means[k].size() != d || prior.scale_mats[k].rows() != d || prior.scale_mats[k].cols() != d)
            throw DimensionError("prior component " + std::to_string(k + 1) + " has inconsistent dimension");
        factor_or_throw(prior.scale_mats[k], "prior scale matrix", k);
    }
}

void check_compatible(const GmmParams& params, const NiwDirichletPrior& prior) {
    if (params.num_components() != prior.num_components() || params.dim() != prior.dim())
        throw DimensionError("parameters and prior disagree on K or d");
}

Matrix component_log_terms(const Matrix& Y, const GmmParams& params) {
    const int K = params.num_components();
    const int d = params.dim();
    if (Y.cols() != d) throw DimensionError("data has " + std::to_string(Y.cols()) + " columns, model has d = " +
                                            std::to_string(d));
    Matrix out(Y.rows(), K);
    for (int k = 0; k < K; ++k) {
        const auto llt = factor_or_throw(params.covs[k], "covariance", k);
        Matrix centered = (Y.rowwise() - params.means[k].transpose()).transpose();
        llt.matrixL().solveInPlace(centered);
        const double log_norm = -0.5 * (d * kLog2Pi + log_det(llt));
        const double log_pi = std::log(params.weights[k]);
        out.col(k) = (log_pi + log_norm - 0.5 * centered.colwise().squaredNorm().array()).transpose();
    }
    return out;
}

Vector row_log_sum_exp(const Matrix& M) {
    Vector out(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const double m = M.row(i).maxCoeff();
        if (!std::isfinite(m)) {
            out[i] = m;
            continue;
        }
        out[i] = m + std::log((M.row(i).array() - m).exp().sum());
    }
    return out;
}

double log_likelihood(const Matrix& Y, const GmmParams& params) {
    const double ll = row_log_sum_exp(component_log_terms(Y, params)).sum();
    if (!std::isfinite(ll)) throw NonFiniteResult("log-likelihood is not finite");
    return ll;
}

double log_prior(const GmmParams& params, const NiwDirichletPrior& prior) {
    check_compatible(params, prior);
    const int d = params.dim();
    double total = 0.0;
    for (int k = 0; k < params.num_components(); ++k) {
        const double a_minus_1 = prior.concentrations[k] - 1.0;
        if (a_minus_1 != 0.0) total += a_minus_1 * std::log(params.weights[k]);

        const auto llt = factor_or_throw(params.covs[k], "covariance", k);
        const Vector dev = params.means[k] - prior.prior_means[k];
        const double quad = dev.dot(llt.solve(dev));
        const double trace = llt.solve(prior.scale_mats[k]).trace();
        total -= ((prior.dofs[k] + d) / 2.0 + 1.0) * log_det(llt) + 0.5 * trace +
                 0.5 * prior.precision_scales[k] * quad;
    }
    if (!std::isfinite(total)) throw NonFiniteResult("log-prior is not finite (zero weight with a_k != 1?)");
    return total;
}

double log_unnorm_posterior(const Matrix& Y, const GmmParams& params, const NiwDirichletPrior& prior) {
    return log_likelihood(Y, params) + log_prior(params, prior);
}

Vector flatten(const GmmParams& params) {
    const int K = params.num_components();
    const int d = params.dim();
    Vector v(flat_size(K, d));
    Eigen::Index j = 0;
    for (int k = 0; k + 1 < K; ++k) v[j++] = params.weights[k];
    for (int k = 0; k < K; ++k) {
        for (int a = 0; a < d; ++a) v[j++] = params.means[k][a];
        for (int r = 0; r < d; ++r)
            for (int c = 0; c <= r; ++c) v[j++] = params.covs[k](r, c);
    }
    return v;
}

GmmParams unflatten(const Eigen::Ref<const Vector>& v, int K, int d) {
    if (K < 2 || d < 1) throw DimensionError("unflatten needs K >= 2 and d >= 1");
    if (v.size() != flat_size(K, d))
        throw DimensionError("flat vector has length " + std::to_string(v.size()) + ", expected " +
                             std::to_string(flat_size(K, d)));
    GmmParams p;
    p.weights.resize(K);
    Eigen::Index j = 0;
    double partial = 0.0;
    for (int k = 0; k + 1 < K; ++k) {
        p.weights[k] = v[j++];
        if (p.weights[k] < 0.0) throw InvalidArgument("negative mixture weight in flat vector");
        partial += p.weights[k];
    }
    p.weights[K - 1] = 1.0 - partial;
    if (p.weights[K - 1] < 0.0) throw InvalidArgument("reconstructed last mixture weight is negative");

    p.means.resize(K);
    p.covs.resize(K);
    for (int k = 0; k < K; ++k) {
        p.means[k] = v.segment(j, d);
        j += d;
        Matrix s(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c <= r; ++c) s(r, c) = s(c, r) = v[j++];
        factor_or_throw(s, "reconstructed covariance", k);
        p.covs[k] = std::move(s);
    }
    return p;
}

std::vector<std::string> flat_labels(int K, int d) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(flat_size(K, d)));
    for (int k = 1; k < K; ++k) out.push_back("pi_" + std::to_string(k));
    for (int k = 1; k <= K; ++k) {
        for (int a = 1; a <= d; ++a) out.push_back("mu_" + std::to_string(k) + "_" + std::to_string(a));
        for (int r = 1; r <= d; ++r)
            for (int c = 1; c <= r; ++c)
                out.push_back("sigma_" + std::to_string(k) + "_" + std::to_string(r) + "_" + std::to_string(c));
    }
    return out;
}

}  // namespace bobgmm
