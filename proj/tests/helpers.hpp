#pragma once

#include "bobgmm/gmm.hpp"
#include "bobgmm/rng.hpp"
#include "bobgmm/samplers.hpp"

#include <cmath>
#include <numbers>

namespace testing {

using bobgmm::GmmParams;
using bobgmm::Matrix;
using bobgmm::NiwDirichletPrior;
using bobgmm::StreamRng;
using bobgmm::Vector;

inline Matrix random_spd(int d, StreamRng& rng, double ridge = 0.5) {
    Matrix A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = bobgmm::sample_standard_normal(rng);
    Matrix S = A * A.transpose() / d;
    S.diagonal().array() += ridge;
    return S;
}

inline GmmParams random_params(int K, int d, StreamRng& rng, double spread = 3.0) {
    GmmParams p;
    p.weights.resize(K);
    for (int k = 0; k < K; ++k) p.weights(k) = 0.2 + rng.uniform();
    p.weights /= p.weights.sum();
    for (int k = 0; k < K; ++k) {
        Vector mu(d);
        for (int j = 0; j < d; ++j) mu(j) = spread * bobgmm::sample_standard_normal(rng);
        p.means.push_back(mu);
        p.covs.push_back(random_spd(d, rng));
    }
    return p;
}

inline NiwDirichletPrior random_prior(int K, int d, StreamRng& rng) {
    NiwDirichletPrior pr;
    pr.concentrations.resize(K);
    pr.precision_scales.resize(K);
    pr.dofs.resize(K);
    for (int k = 0; k < K; ++k) {
        pr.concentrations(k) = 1.0 + 2.0 * rng.uniform();
        pr.precision_scales(k) = 0.1 + 2.0 * rng.uniform();
        pr.dofs(k) = d + 1.0 + 5.0 * rng.uniform();
        Vector b(d);
        for (int j = 0; j < d; ++j) b(j) = bobgmm::sample_standard_normal(rng);
        pr.prior_means.push_back(b);
        pr.scale_mats.push_back(random_spd(d, rng));
    }
    return pr;
}

inline Matrix sample_data(const GmmParams& p, int n, StreamRng& rng) {
    const int d = p.dim();
    Matrix Y(n, d);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        int z = 0;
        double cum = p.weights(0);
        while (u >= cum && z + 1 < p.num_components()) cum += p.weights(++z);
        Y.row(i) = bobgmm::sample_mvn(p.means[z], p.covs[z], rng).transpose();
    }
    return Y;
}

// Naive multivariate normal log density through the explicit inverse.
inline double naive_log_normal(const Vector& y, const Vector& mu, const Matrix& S) {
    const int d = static_cast<int>(y.size());
    const Vector r = y - mu;
    return -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(S.determinant()) -
           0.5 * r.dot(S.inverse() * r);
}

}  // namespace testing
