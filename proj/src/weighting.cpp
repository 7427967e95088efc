#include "bobgmm/weighting.hpp"

#include <cmath>

namespace bobgmm {

std::string to_string(WeightVariant v) {
    switch (v) {
    case WeightVariant::wlb: return "wlb";
    case WeightVariant::wbb1: return "wbb1";
    case WeightVariant::wbb2: return "wbb2";
    case WeightVariant::bob: return "bob";
    }
    return "unknown";
}

WeightVariant parse_weight_variant(const std::string& name) {
    if (name == "wlb") return WeightVariant::wlb;
    if (name == "wbb1") return WeightVariant::wbb1;
    if (name == "wbb2") return WeightVariant::wbb2;
    if (name == "bob") return WeightVariant::bob;
    throw InvalidArgument("unknown weighting scheme '" + name + "'");
}

std::string to_string(LikelihoodScale s) { return s == LikelihoodScale::unit ? "unit" : "n"; }

LikelihoodScale parse_likelihood_scale(const std::string& name) {
    if (name == "unit") return LikelihoodScale::unit;
    if (name == "n") return LikelihoodScale::n;
    throw InvalidArgument("likelihood_scale must be 'unit' or 'n'");
}

WeightScheme WeightScheme::bob(Vector x) {
    WeightScheme s;
    s.variant = WeightVariant::bob;
    s.bob_x = std::move(x);
    return s;
}

WeightScheme WeightScheme::of(WeightVariant v, bool dirichlet_likelihood) {
    WeightScheme s;
    s.variant = v;
    s.dirichlet_likelihood = dirichlet_likelihood;
    return s;
}

void validate(const WeightScheme& scheme, int K) {
    if (scheme.variant != WeightVariant::bob) return;
    const Vector& x = scheme.bob_x;
    if (x.size() != bob_dimension(K))
        throw DimensionError("BOB parameter vector must have length 2(K+1) = " + std::to_string(bob_dimension(K)));
    if (!x.allFinite()) throw InvalidArgument("BOB parameters must be finite");
    if (x[0] < 1.0) throw InvalidArgument("BOB requires x_alpha >= 1");
    if ((x.tail(x.size() - 1).array() < 0.0).any()) throw InvalidArgument("BOB prior weights must be non-negative");
}

Vector power_dirichlet_weights(double alpha, int n, StreamRng& rng) {
    Vector u(n);
    for (int i = 0; i < n; ++i) {
        const double w = rng.exponential();
        u[i] = alpha == 1.0 ? w : std::pow(w, alpha);
    }
    return u / u.sum();
}

WeightDraw draw_weights(const WeightScheme& scheme, int n, int K, StreamRng& rng) {
    if (n < 1) throw InvalidArgument("need at least one observation");
    validate(scheme, K);
    WeightDraw w;
    switch (scheme.variant) {
    case WeightVariant::wlb:
        w.likelihood_weights = power_dirichlet_weights(1.0, n, rng);
        w.prior_weight_pi = 0.0;
        w.prior_weights_mu = Vector::Zero(K);
        w.prior_weights_sigma = Vector::Zero(K);
        break;
    case WeightVariant::bob: {
        const Vector& x = scheme.bob_x;
        w.likelihood_weights = power_dirichlet_weights(x[0], n, rng);
        w.prior_weights_mu = x.segment(1, K);
        w.prior_weights_sigma = x.segment(1 + K, K);
        w.prior_weight_pi = x[2 * K + 1];
        break;
    }
    case WeightVariant::wbb1:
    case WeightVariant::wbb2: {
        if (scheme.dirichlet_likelihood) {
            w.likelihood_weights = power_dirichlet_weights(1.0, n, rng);
        } else {
            w.likelihood_weights.resize(n);
            for (int i = 0; i < n; ++i) w.likelihood_weights[i] = rng.exponential();
        }
        if (scheme.variant == WeightVariant::wbb2) {
            w.prior_weight_pi = 1.0;
            w.prior_weights_mu = Vector::Ones(K);
            w.prior_weights_sigma = Vector::Ones(K);
        } else {
            w.prior_weight_pi = rng.exponential();
            w.prior_weights_mu.resize(K);
            w.prior_weights_sigma.resize(K);
            for (int k = 0; k < K; ++k) w.prior_weights_mu[k] = rng.exponential();
            for (int k = 0; k < K; ++k) w.prior_weights_sigma[k] = rng.exponential();
        }
        break;
    }
    }
    const bool normalized = scheme.variant == WeightVariant::wlb || scheme.variant == WeightVariant::bob ||
                            scheme.dirichlet_likelihood;
    if (normalized && scheme.likelihood_scale == LikelihoodScale::n) w.likelihood_weights *= static_cast<double>(n);
    return w;
}

OverdispersionSummary dirichlet_overdispersion_check(double x_alpha, int n, int n_draws, StreamRng& rng) {
    if (x_alpha < 1.0) throw InvalidArgument("x_alpha must be at least 1");
    if (n < 1 || n_draws < 2) throw InvalidArgument("need n >= 1 and at least two draws");
    // E[u_i] = 1/n exactly, so v_s = mean_i (u_si - 1/n)^2 is an unbiased,
    // draw-wise independent estimate of the average coordinate variance.
    const double centre = 1.0 / n;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int s = 0; s < n_draws; ++s) {
        const Vector u = power_dirichlet_weights(x_alpha, n, rng);
        const double v = (u.array() - centre).square().mean();
        sum += v;
        sum_sq += v * v;
    }
    OverdispersionSummary out;
    out.variance = sum / n_draws;
    const double var_v = std::max(0.0, (sum_sq - n_draws * out.variance * out.variance) / (n_draws - 1));
    out.std_error = std::sqrt(var_v / n_draws);
    out.coefficient_of_variation = std::sqrt(out.variance) * n;
    return out;
}

}  // namespace bobgmm
