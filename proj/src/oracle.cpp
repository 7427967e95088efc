#include "bobgmm/oracle.hpp"

#include "bobgmm/errors.hpp"
#include "bobgmm/rng.hpp"
#include "bobgmm/samplers.hpp"

#include <exception>
#include <string>

namespace bobgmm {

LabelMatrix LabelMatrix::from_labels(const std::vector<int>& labels, int K) {
    if (K < 1) throw InvalidArgument("label matrix needs K >= 1");
    LabelMatrix Z{Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(labels.size()), K)};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= K) throw InvalidArgument("label out of range at row " + std::to_string(i));
        Z.z(static_cast<Eigen::Index>(i), labels[i]) = 1;
    }
    return Z;
}

std::vector<int> LabelMatrix::labels() const {
    std::vector<int> out(static_cast<std::size_t>(z.rows()));
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        Eigen::Index k = 0;
        z.row(i).maxCoeff(&k);
        out[static_cast<std::size_t>(i)] = static_cast<int>(k);
    }
    return out;
}

Vector LabelMatrix::counts() const { return z.cast<double>().colwise().sum().transpose(); }

void validate(const LabelMatrix& Z) {
    if (Z.z.cols() < 1) throw DimensionError("label matrix has no columns");
    for (Eigen::Index i = 0; i < Z.z.rows(); ++i) {
        if ((Z.z.row(i).array() < 0).any() || (Z.z.row(i).array() > 1).any() || Z.z.row(i).sum() != 1)
            throw InvalidArgument("label matrix row " + std::to_string(i) + " is not one-hot");
    }
}

PosteriorHyper posterior_hyper(const Matrix& Y, const LabelMatrix& Z, const NiwDirichletPrior& prior) {
    validate(prior);
    validate(Z);
    const int K = static_cast<int>(prior.concentrations.size());
    const auto d = Y.cols();
    if (Z.z.rows() != Y.rows() || Z.z.cols() != K) throw DimensionError("labels do not match data and prior");
    if (prior.prior_means.front().size() != d) throw DimensionError("prior dimension does not match data");

    PosteriorHyper h;
    h.post_lambdas.resize(K);
    h.post_dofs.resize(K);
    h.post_concs.resize(K);
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        Vector sum = Vector::Zero(d);
        double nk = 0.0;
        for (Eigen::Index i = 0; i < Y.rows(); ++i)
            if (Z.z(i, k) == 1) {
                sum += Y.row(i).transpose();
                nk += 1.0;
            }
        const double lambda = prior.precision_scales(k);
        const Vector& beta = prior.prior_means[ku];
        Matrix scale = prior.scale_mats[ku];
        Vector mean = beta;
        if (nk > 0.0) {
            const Vector ybar = sum / nk;
            Matrix S = Matrix::Zero(d, d);
            for (Eigen::Index i = 0; i < Y.rows(); ++i)
                if (Z.z(i, k) == 1) {
                    const Vector c = Y.row(i).transpose() - ybar;
                    S.noalias() += c * c.transpose();
                }
            const Vector diff = ybar - beta;
            scale += S + (lambda * nk / (lambda + nk)) * diff * diff.transpose();
            scale = 0.5 * (scale + scale.transpose()).eval();
            mean = (lambda * beta + nk * ybar) / (lambda + nk);
        }
        h.post_means.push_back(mean);
        h.post_scales.push_back(scale);
        h.post_lambdas(k) = lambda + nk;
        h.post_dofs(k) = prior.dofs(k) + nk;
        h.post_concs(k) = prior.concentrations(k) + nk;
    }
    return h;
}

GmmParams sample_posterior_draw(const PosteriorHyper& hyper, std::uint64_t seed, std::size_t s) {
    StreamRng rng(seed, stream_id(StreamTag::oracle, 0, static_cast<std::uint64_t>(s)));
    const int K = hyper.num_components();
    GmmParams p;
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        Matrix Sigma = sample_inverse_wishart(hyper.post_dofs(k), hyper.post_scales[ku], rng);
        p.means.push_back(sample_mvn(hyper.post_means[ku], Sigma / hyper.post_lambdas(k), rng));
        p.covs.push_back(std::move(Sigma));
    }
    p.weights = sample_dirichlet(hyper.post_concs, rng);
    return p;
}

std::vector<GmmParams> sample_bayes_posterior(const PosteriorHyper& hyper, std::size_t S, std::uint64_t seed,
                                              Exec exec) {
    const auto d = static_cast<double>(hyper.post_means.front().size());
    for (int k = 0; k < hyper.num_components(); ++k)
        if (!(hyper.post_dofs(k) > d - 1.0)) throw InvalidDof("posterior dof must exceed d - 1");
    std::vector<GmmParams> draws(S);
    std::vector<std::string> errors(S);
    for_each_index(exec, S, [&](std::size_t s) {
        try {
            draws[s] = sample_posterior_draw(hyper, seed, s);
        } catch (const std::exception& e) {
            errors[s] = e.what();
        }
    });
    for (std::size_t s = 0; s < S; ++s)
        if (!errors[s].empty()) throw Error("oracle draw " + std::to_string(s) + ": " + errors[s]);
    return draws;
}

}  // namespace bobgmm
