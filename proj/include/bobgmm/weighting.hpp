#pragma once

#include "bobgmm/rng.hpp"
#include "bobgmm/weighted_em.hpp"

#include <string>

namespace bobgmm {

enum class WeightVariant { wlb, wbb1, wbb2, bob };

/// Total mass of normalized likelihood weights (WLB, BOB, Dirichlet WBB).
/// `unit` sums to 1; `n` multiplies by n so the E-step exponents u_i are
/// O(1) as for Exp(1) weights. Prior weights are never rescaled.
enum class LikelihoodScale { unit, n };

std::string to_string(LikelihoodScale s);
LikelihoodScale parse_likelihood_scale(const std::string& name);

std::string to_string(WeightVariant v);
WeightVariant parse_weight_variant(const std::string& name);

/// Weight distribution. For BOB, x = (x_alpha, x_mu_1..x_mu_K,
/// x_sigma_1..x_sigma_K, x_pi) fixes alpha and all prior weights.
struct WeightScheme {
    WeightVariant variant = WeightVariant::wbb2;
    Vector bob_x;
    /// WBB variants only: normalize the Exp(1) likelihood weights onto the
    /// simplex (uniform Dirichlet) instead of leaving them unnormalized.
    bool dirichlet_likelihood = false;
    LikelihoodScale likelihood_scale = LikelihoodScale::unit;

    static WeightScheme bob(Vector x);
    static WeightScheme of(WeightVariant v, bool dirichlet_likelihood = false);
};

constexpr int bob_dimension(int K) { return 2 * (K + 1); }

void validate(const WeightScheme& scheme, int K);

/// Draws u and the prior weights. Every scheme consumes the first n
/// exponentials of the stream for the likelihood weights, so schemes that
/// agree mathematically agree bit-for-bit on a shared stream.
WeightDraw draw_weights(const WeightScheme& scheme, int n, int K, StreamRng& rng);

/// u_i = w_i^alpha / sum_j w_j^alpha with w_i ~ Exp(1).
Vector power_dirichlet_weights(double alpha, int n, StreamRng& rng);

struct OverdispersionSummary {
    double variance = 0.0;   ///< mean over coordinates of Var(u_i)
    double std_error = 0.0;  ///< Monte Carlo standard error of `variance`
    double coefficient_of_variation = 0.0;  ///< sqrt(variance) / (1/n)
};

/// Monte Carlo spread of the BOB likelihood weights for a given x_alpha.
OverdispersionSummary dirichlet_overdispersion_check(double x_alpha, int n, int n_draws, StreamRng& rng);

}  // namespace bobgmm
