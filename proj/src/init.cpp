#include "bobgmm/init.hpp"

#include "bobgmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace bobgmm {

namespace {

int sample_index(const Vector& weights, StreamRng& rng) {
    const double total = weights.sum();
    const double u = rng.uniform() * total;
    double cum = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        cum += weights(i);
        if (u < cum) return static_cast<int>(i);
    }
    for (Eigen::Index i = weights.size() - 1; i >= 0; --i)
        if (weights(i) > 0.0) return static_cast<int>(i);
    return 0;
}

std::size_t distinct_rows(const Matrix& Y) {
    std::set<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        const Vector r = Y.row(i).transpose();
        rows.insert(std::vector<double>(r.data(), r.data() + r.size()));
    }
    return rows.size();
}

}  // namespace

KmeansResult kmeans_pp(const Matrix& Y, int K, StreamRng& rng, int max_iter) {
    const auto n = Y.rows();
    const auto d = Y.cols();
    if (K < 1) throw InvalidArgument("k-means needs K >= 1");
    if (distinct_rows(Y) < static_cast<std::size_t>(K)) throw InvalidArgument("fewer distinct points than components");

    Matrix C(K, d);
    Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
    C.row(0) = Y.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
    for (int k = 1; k < K; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) dist2(i) = std::min(dist2(i), (Y.row(i) - C.row(k - 1)).squaredNorm());
        C.row(k) = Y.row(sample_index(dist2, rng));
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    double inertia = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        inertia = 0.0;
        Vector best(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            int arg = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                const double v = (Y.row(i) - C.row(k)).squaredNorm();
                if (v < bd) {
                    bd = v;
                    arg = k;
                }
            }
            best(i) = bd;
            inertia += bd;
            if (labels[static_cast<std::size_t>(i)] != arg) {
                labels[static_cast<std::size_t>(i)] = arg;
                changed = true;
            }
        }
        if (!changed && it > 0) break;
        Matrix sums = Matrix::Zero(K, d);
        Vector counts = Vector::Zero(K);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += Y.row(i);
            counts(labels[static_cast<std::size_t>(i)]) += 1.0;
        }
        for (int k = 0; k < K; ++k) {
            if (counts(k) > 0.0) {
                C.row(k) = sums.row(k) / counts(k);
            } else {
                Eigen::Index far = 0;
                best.maxCoeff(&far);
                C.row(k) = Y.row(far);
                best(far) = 0.0;
            }
        }
    }
    return {std::move(labels), std::move(C), inertia};
}

GmmParams params_from_labels(const Matrix& Y, const std::vector<int>& labels, int K) {
    const auto n = Y.rows();
    const auto d = Y.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n) throw DimensionError("label count differs from data rows");
    const Vector grand = Y.colwise().mean().transpose();
    Matrix pooled = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector c = Y.row(i).transpose() - grand;
        pooled.noalias() += c * c.transpose();
    }
    pooled /= static_cast<double>(std::max<Eigen::Index>(n, 1));
    pooled.diagonal().array() += 1e-6;

    GmmParams p;
    p.weights = Vector::Zero(K);
    for (int k = 0; k < K; ++k) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < n; ++i)
            if (labels[static_cast<std::size_t>(i)] == k) rows.push_back(i);
        const auto nk = static_cast<double>(rows.size());
        p.weights(k) = std::max(nk, 0.5);
        Vector mu = grand;
        if (!rows.empty()) {
            mu.setZero();
            for (auto i : rows) mu += Y.row(i).transpose();
            mu /= nk;
        }
        Matrix cov = pooled;
        if (rows.size() >= 2) {
            cov.setZero();
            for (auto i : rows) {
                const Vector c = Y.row(i).transpose() - mu;
                cov.noalias() += c * c.transpose();
            }
            cov /= nk;
            cov.diagonal().array() += 1e-6;
        }
        p.means.push_back(mu);
        p.covs.push_back(cov);
    }
    p.weights /= p.weights.sum();
    return p;
}

InitResult init_params(const Matrix& Y, int K, int n_restarts, std::uint64_t seed, const NiwDirichletPrior& prior,
                       int polish_iter) {
    if (n_restarts < 1) throw InvalidArgument("init needs at least one restart");
    if (Y.rows() < K) throw InvalidArgument("init needs n >= K");
    const WeightDraw unit = WeightDraw::unit(static_cast<int>(Y.rows()), K);
    EmSettings polish;
    polish.max_iter = polish_iter;
    polish.tol = 0.0;

    InitResult out;
    double best = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < n_restarts; ++r) {
        StreamRng rng(seed, stream_id(StreamTag::init, static_cast<std::uint64_t>(r)));
        const KmeansResult km = kmeans_pp(Y, K, rng);
        GmmParams cand = params_from_labels(Y, km.labels, K);
        if (polish_iter > 0) {
            try {
                cand = run_weighted_em(Y, unit, prior, cand, polish).params;
            } catch (const Error&) {
            }
        }
        double score = -std::numeric_limits<double>::infinity();
        try {
            score = log_unnorm_posterior(Y, cand, prior);
        } catch (const Error&) {
        }
        out.candidate_scores.push_back(score);
        if (r == 0 || score > best) {
            best = score;
            out.params = std::move(cand);
            out.chosen = static_cast<std::size_t>(r);
        }
    }
    if (!std::isfinite(best)) throw Error("no initial candidate has a finite posterior density");
    return out;
}

std::vector<double> default_lambda_grid() { return {0.1, 1.0, 10.0}; }

std::vector<double> default_nu_grid(int d) { return {d + 2.0, d + 10.0, d + 50.0}; }

Matrix select_rows(const Matrix& Y, const std::vector<int>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), Y.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = Y.row(rows[i]);
    return out;
}

GmmParams cv_fit(const Matrix& Y_train, int K, double lambda, double nu, std::uint64_t seed,
                 const CvOptions& options) {
    const auto d = static_cast<int>(Y_train.cols());
    const NiwDirichletPrior prior = NiwDirichletPrior::symmetric(K, d, options.concentration, lambda, nu);
    const GmmParams init = init_params(Y_train, K, options.n_restarts, seed, prior).params;
    return run_weighted_em(Y_train, WeightDraw::unit(static_cast<int>(Y_train.rows()), K), prior, init, options.em)
        .params;
}

CvResult cv_select_lambda_nu(const Matrix& Y, int K, const std::vector<double>& grid_lambda,
                             const std::vector<double>& grid_nu, double split_fraction, std::uint64_t seed,
                             const CvOptions& options) {
    if (grid_lambda.empty() || grid_nu.empty()) throw InvalidArgument("CV grids must be non-empty");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw InvalidArgument("split fraction must be in (0, 1)");
    const auto n = static_cast<int>(Y.rows());

    CvResult out;
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    StreamRng rng(seed, stream_id(StreamTag::cross_validation, 0));
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    const int n_train = std::clamp(static_cast<int>(std::lround(split_fraction * n)), 1, n - 1);
    out.train.assign(perm.begin(), perm.begin() + n_train);
    out.validation.assign(perm.begin() + n_train, perm.end());
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    const Matrix Yt = select_rows(Y, out.train);
    const Matrix Yv = select_rows(Y, out.validation);

    // Ties resolve to the smaller values, so scan the grids in sorted order.
    std::vector<std::size_t> li(grid_lambda.size()), ni(grid_nu.size());
    std::iota(li.begin(), li.end(), 0);
    std::iota(ni.begin(), ni.end(), 0);
    std::stable_sort(li.begin(), li.end(), [&](auto a, auto b) { return grid_lambda[a] < grid_lambda[b]; });
    std::stable_sort(ni.begin(), ni.end(), [&](auto a, auto b) { return grid_nu[a] < grid_nu[b]; });

    const std::uint64_t fit_seed = mix64(seed ^ 0xC0FFEEULL);
    out.scores = Matrix::Constant(static_cast<Eigen::Index>(grid_lambda.size()),
                                  static_cast<Eigen::Index>(grid_nu.size()),
                                  -std::numeric_limits<double>::infinity());
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (auto a : li)
        for (auto b : ni) {
            try {
                const GmmParams fit = cv_fit(Yt, K, grid_lambda[a], grid_nu[b], fit_seed, options);
                const double score = log_likelihood(Yv, fit);
                out.scores(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = score;
                if (!found || score > best) {
                    best = score;
                    out.lambda = grid_lambda[a];
                    out.nu = grid_nu[b];
                    found = true;
                }
            } catch (const Error&) {
            }
        }
    if (!found) throw Error("cross-validation: every EM fit failed");
    return out;
}

}  // namespace bobgmm
