#include "bobgmm/errors.hpp"
#include "bobgmm/weighted_em.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <iostream>
#include <sstream>

using namespace bobgmm;

namespace {

WeightDraw random_draw(int n, int K, StreamRng& rng) {
    WeightDraw w;
    w.likelihood_weights.resize(n);
    for (int i = 0; i < n; ++i) w.likelihood_weights(i) = rng.exponential();
    w.prior_weight_pi = rng.exponential();
    w.prior_weights_mu = Vector(K);
    w.prior_weights_sigma = Vector(K);
    for (int k = 0; k < K; ++k) {
        w.prior_weights_mu(k) = rng.exponential();
        w.prior_weights_sigma(k) = 0.5 + rng.exponential();
    }
    return w;
}

// Eq. (4) + Eq. (5) written out directly.
double naive_weighted_posterior(const Matrix& Y, const GmmParams& p, const NiwDirichletPrior& pr, const WeightDraw& w) {
    const int K = p.num_components();
    const int d = p.dim();
    double total = 0.0;
    for (int i = 0; i < Y.rows(); ++i) {
        double s = 0.0;
        for (int k = 0; k < K; ++k)
            s += std::pow(p.weights(k) * std::exp(testing::naive_log_normal(Y.row(i).transpose(), p.means[k], p.covs[k])),
                          w.likelihood_weights(i));
        total += std::log(s);
    }
    for (int k = 0; k < K; ++k) {
        const Matrix inv = p.covs[k].inverse();
        const Vector dm = p.means[k] - pr.prior_means[k];
        total += w.prior_weight_pi * (pr.concentrations(k) - 1.0) * std::log(p.weights(k));
        total -= w.prior_weights_sigma(k) * (((pr.dofs(k) + d) / 2.0 + 1.0) * std::log(p.covs[k].determinant()) +
                                             0.5 * (pr.scale_mats[k] * inv).trace());
        total -= w.prior_weights_mu(k) * 0.5 * pr.precision_scales(k) * dm.dot(inv * dm);
    }
    return total;
}

// Eq. (8): expected weighted complete-data log posterior at theta given Q.
double surrogate(const Matrix& Y, const Matrix& Q, const GmmParams& p, const NiwDirichletPrior& pr, const WeightDraw& w) {
    double total = 0.0;
    for (int i = 0; i < Y.rows(); ++i)
        for (int k = 0; k < p.num_components(); ++k)
            total += w.likelihood_weights(i) * Q(i, k) *
                     (std::log(p.weights(k)) + testing::naive_log_normal(Y.row(i).transpose(), p.means[k], p.covs[k]));
    WeightDraw none = w;
    none.likelihood_weights.setZero();
    return total + naive_weighted_posterior(Matrix::Zero(0, Y.cols()), p, pr, none);
}

struct Instance {
    Matrix Y;
    GmmParams init;
    NiwDirichletPrior prior;
    WeightDraw w;
};

Instance make_instance(std::uint64_t seed, int n, int d, int K) {
    StreamRng rng(seed, 99);
    Instance s;
    const GmmParams truth = testing::random_params(K, d, rng);
    s.Y = testing::sample_data(truth, n, rng);
    s.init = testing::random_params(K, d, rng);
    s.prior = testing::random_prior(K, d, rng);
    s.w = random_draw(n, K, rng);
    return s;
}

}  // namespace

TEST_CASE("temperature examples") {
    CHECK(temperature({0.0, 0.0, 7.0, 3.0}, 3) == 1.0);
    CHECK(temperature({0.5, 1.0, 1.0, 2.0}, 1) == doctest::Approx(2.01855004832931).epsilon(1e-12));
    for (const auto& prof : default_tempering_grid()) {
        if (!is_admissible(prof)) continue;
        CHECK(std::abs(temperature(prof, 1000000) - 1.0) < 1e-3);
    }
}

TEST_CASE("temperature rejects invalid profiles") {
    CHECK_THROWS_AS(temperature({1.0, 0.0, 1.0, 1.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(temperature({0.0, 0.0, 0.0, 1.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(temperature({0.0, 0.0, 1.0, 1.0}, 0), InvalidArgument);
    // b strongly negative drives T below zero near tau = pi / 2.
    CHECK_FALSE(is_admissible({0.0, -50.0, 1.0, 1.0}));
}

TEST_CASE("e_step: symmetric components and zero weights give uniform rows") {
    GmmParams p;
    p.weights = Vector::Constant(2, 0.5);
    p.means = {Vector::Zero(1), Vector::Zero(1)};
    p.covs = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
    Matrix Y(3, 1);
    Y << -1, 0.3, 2;
    const Matrix Q = e_step(Y, p, Vector::Ones(3), 1.0);
    CHECK((Q.array() - 0.5).abs().maxCoeff() < 1e-15);

    p.means[1](0) = 4.0;
    Vector u(3);
    u << 1, 0, 1;
    const Matrix R = e_step(Y, p, u, 1.0);
    CHECK(R(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(R(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("e_step matches the per-entry formula oracle") {
    GmmParams p;
    p.weights = Vector(2);
    p.weights << 0.3, 0.7;
    p.means = {Vector::Constant(1, -1.0), Vector::Constant(1, 2.0)};
    p.covs = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 2.0)};
    Matrix Y(3, 1);
    Y << 0.0, 1.5, -2.0;
    Vector u(3);
    u << 1.0, 2.0, 0.5;
    const double T = 1.3;
    const Matrix Q = e_step(Y, p, u, T);
    for (int i = 0; i < 3; ++i) {
        double num[2];
        for (int k = 0; k < 2; ++k) {
            const double dens = p.weights(k) * std::exp(-0.5 * std::pow(Y(i, 0) - p.means[k](0), 2) / p.covs[k](0, 0)) /
                                std::sqrt(2 * M_PI * p.covs[k](0, 0));
            num[k] = std::pow(std::pow(dens, u(i)), 1.0 / T);
        }
        for (int k = 0; k < 2; ++k) CHECK(std::abs(Q(i, k) - num[k] / (num[0] + num[1])) < 1e-10);
    }
}

TEST_CASE("e_step rows are distributions and flatten as T grows") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Instance s = make_instance(seed, 25, 2, 3);
        const Matrix Q1 = e_step(s.Y, s.init, s.w.likelihood_weights, 1.0);
        const Matrix Q2 = e_step(s.Y, s.init, s.w.likelihood_weights, 2.5);
        for (int i = 0; i < s.Y.rows(); ++i) {
            CHECK(std::abs(Q1.row(i).sum() - 1.0) < 1e-12);
            CHECK(Q1.row(i).minCoeff() >= 0.0);
            CHECK(Q2.row(i).maxCoeff() <= Q1.row(i).maxCoeff() + 1e-15);
        }
    }
}

TEST_CASE("m_step: empty component falls back to the prior mode") {
    const int d = 2;
    NiwDirichletPrior pr = NiwDirichletPrior::symmetric(2, d, 2.0, 1.5, 6.0);
    pr.prior_means[1] << 3.0, -1.0;
    pr.scale_mats[1] << 2.0, 0.3, 0.3, 1.0;
    Matrix Y(4, d);
    Y << 0, 0, 1, 0, 0, 1, 1, 1;
    Matrix Q(4, 2);
    Q.col(0).setOnes();
    Q.col(1).setZero();
    const WeightDraw w = WeightDraw::unit(4, 2);

    const GmmParams lit = m_step(Y, Q, w, pr, CovarianceUpdate::marginal_mode);
    CHECK((lit.covs[1] - pr.scale_mats[1] / (6.0 + d + 1)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(lit.means[1] == pr.prior_means[1]);

    const GmmParams sur = m_step(Y, Q, w, pr, CovarianceUpdate::surrogate_mode);
    CHECK((sur.covs[1] - pr.scale_mats[1] / (6.0 + d + 2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(sur.means[1] == pr.prior_means[1]);
}

TEST_CASE("m_step: unit weights and a = 1 give pi = n_k / n") {
    const Instance s = make_instance(7, 30, 2, 3);
    NiwDirichletPrior pr = s.prior;
    pr.concentrations.setOnes();
    const Matrix Q = e_step(s.Y, s.init, Vector::Ones(30), 1.0);
    const GmmParams next = m_step(s.Y, Q, WeightDraw::unit(30, 3), pr);
    for (int k = 0; k < 3; ++k) CHECK(next.weights(k) == doctest::Approx(Q.col(k).sum() / 30.0).epsilon(1e-13));
}

TEST_CASE("m_step maximizes the surrogate block by block") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Instance s = make_instance(seed, 20, 2, 2);
        const Matrix Q = e_step(s.Y, s.init, s.w.likelihood_weights, 1.0);
        const GmmParams best = m_step(s.Y, Q, s.w, s.prior);
        const double f0 = surrogate(s.Y, Q, best, s.prior, s.w);
        StreamRng rng(seed, 5);
        for (int trial = 0; trial < 200; ++trial) {
            GmmParams q = best;
            const double h = 1e-3 * (1 + trial % 10);
            const int k = trial % 2;
            switch (trial % 3) {
            case 0: q.means[k] += h * Vector::Random(2); break;
            case 1: {
                Matrix E = h * testing::random_spd(2, rng, 0.0);
                q.covs[k] += (trial % 2 ? 1.0 : -0.5) * E;
                break;
            }
            default:
                q.weights(0) += (rng.uniform() - 0.5) * h;
                q.weights(1) = 1.0 - q.weights(0);
            }
            CHECK(surrogate(s.Y, Q, q, s.prior, s.w) <= f0 + 1e-10);
        }
    }
}

TEST_CASE("m_step error conditions") {
    const Instance s = make_instance(3, 10, 2, 2);
    const Matrix Q = e_step(s.Y, s.init, s.w.likelihood_weights, 1.0);
    WeightDraw w = s.w;
    w.likelihood_weights.setZero();
    w.prior_weights_sigma.setConstant(0.01);
    CHECK_THROWS_AS(m_step(s.Y, Q, w, s.prior, CovarianceUpdate::marginal_mode), InvalidDof);

    WeightDraw z = s.w;
    z.likelihood_weights.setZero();
    z.prior_weight_pi = 0.0;
    CHECK_THROWS_AS(m_step(s.Y, Q, z, s.prior), DegeneratePosterior);
}

TEST_CASE("weighted objective matches the direct Eq. 4 + Eq. 5 evaluation") {
    const Instance s = make_instance(13, 20, 2, 2);
    CHECK(std::abs(weighted_log_posterior(s.Y, s.init, s.prior, s.w) -
                   naive_weighted_posterior(s.Y, s.init, s.prior, s.w)) < 1e-10);
}

TEST_CASE("run_weighted_em ascends and its reported objective re-evaluates exactly") {
    const Instance s = make_instance(17, 20, 2, 2);
    EmSettings st;
    st.record_trace = true;
    const EmResult r = run_weighted_em(s.Y, s.w, s.prior, s.init, st);
    CHECK(r.diagnostics.log_posterior >= weighted_log_posterior(s.Y, s.init, s.prior, s.w));
    CHECK(std::abs(r.diagnostics.log_posterior - naive_weighted_posterior(s.Y, r.params, s.prior, s.w)) < 1e-10);
    for (std::size_t t = 1; t < r.diagnostics.trace.size(); ++t)
        CHECK(r.diagnostics.trace[t] >= r.diagnostics.trace[t - 1] - 1e-8);
}

TEST_CASE("run_weighted_em: unweighted output is a fixed point") {
    const Instance s = make_instance(19, 30, 2, 2);
    const WeightDraw w = WeightDraw::unit(30, 2);
    EmSettings st;
    st.tol = 1e-12;
    st.max_iter = 5000;
    const EmResult r = run_weighted_em(s.Y, w, s.prior, s.init, st);
    REQUIRE(r.diagnostics.converged);
    EmSettings one;
    one.max_iter = 1;
    const EmResult again = run_weighted_em(s.Y, w, s.prior, r.params, one);
    const double f0 = r.diagnostics.log_posterior;
    CHECK(std::abs(again.diagnostics.log_posterior - f0) / (1 + std::abs(f0)) < 1e-8);
}

TEST_CASE("run_weighted_em: means stay inside the data range in one dimension") {
    StreamRng rng(23, 0);
    Matrix Y(40, 1);
    for (int i = 0; i < 40; ++i) Y(i, 0) = (i < 20 ? -5.0 : 5.0) + 0.5 * sample_standard_normal(rng);
    NiwDirichletPrior pr = NiwDirichletPrior::symmetric(2, 1, 1.1, 0.1, 3.0);
    GmmParams init;
    init.weights = Vector::Constant(2, 0.5);
    init.means = {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
    init.covs = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
    for (int rep = 0; rep < 20; ++rep) {
        WeightDraw w = WeightDraw::unit(40, 2);
        for (int i = 0; i < 40; ++i) w.likelihood_weights(i) = rng.exponential();
        const EmResult r = run_weighted_em(Y, w, pr, init, {});
        for (int k = 0; k < 2; ++k) {
            CHECK(r.params.means[k](0) >= Y.minCoeff());
            CHECK(r.params.means[k](0) <= Y.maxCoeff());
        }
    }
}

TEST_CASE("run_weighted_em is equivariant under label permutation") {
    const Instance s = make_instance(29, 25, 2, 2);
    NiwDirichletPrior pr = NiwDirichletPrior::symmetric(2, 2, 1.5, 1.0, 5.0);
    WeightDraw w = s.w;
    w.prior_weights_mu.setConstant(0.7);
    w.prior_weights_sigma.setConstant(1.3);
    GmmParams swapped = s.init;
    std::swap(swapped.means[0], swapped.means[1]);
    std::swap(swapped.covs[0], swapped.covs[1]);
    std::swap(swapped.weights(0), swapped.weights(1));
    const EmResult a = run_weighted_em(s.Y, w, pr, s.init, {});
    const EmResult b = run_weighted_em(s.Y, w, pr, swapped, {});
    CHECK(std::abs(a.params.weights(0) - b.params.weights(1)) < 1e-10);
    CHECK((a.params.means[0] - b.params.means[1]).norm() < 1e-10);
    CHECK((a.params.covs[1] - b.params.covs[0]).norm() < 1e-10);
}

TEST_CASE("tune_tempering: singleton, rejected entries and exhaustive rerun") {
    const Instance s = make_instance(1, 40, 2, 2);
    const EmSettings st;
    const TemperingProfile only{0.3, 1.0, 1.0, 2.0};
    CHECK(tune_tempering(s.Y, s.prior, {only}, s.init, st).index == 0);

    std::ostringstream sink;
    auto* old = std::clog.rdbuf(sink.rdbuf());
    const TemperingProfile bad{0.0, -50.0, 1.0, 1.0};
    const auto sel = tune_tempering(s.Y, s.prior, {bad, only}, s.init, st);
    std::clog.rdbuf(old);
    CHECK(sel.index == 1);
    CHECK_FALSE(sel.scores[0].has_value());
    CHECK(sink.str().find("skip") != std::string::npos);

    const std::vector<TemperingProfile> grid{{0.0, 0.0, 1.0, 1.0}, {0.3, 0.5, 2.0, 4.0}};
    double score[2];
    for (int g = 0; g < 2; ++g) {
        EmSettings e = st;
        e.profile = grid[g];
        const EmResult r = run_weighted_em(s.Y, WeightDraw::unit(40, 2), s.prior, s.init, e);
        score[g] = log_unnorm_posterior(s.Y, r.params, s.prior);
    }
    const auto chosen = tune_tempering(s.Y, s.prior, grid, s.init, st);
    CHECK(chosen.index == (score[1] > score[0] ? 1u : 0u));
}

TEST_CASE("default tempering grid has 48 admissible-or-skipped entries") {
    CHECK(default_tempering_grid().size() == 48);
}
