#pragma once

#include "bobgmm/gmm.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace bobgmm {

/// Matern nu = 5/2 with ARD length scales.
double matern25(const Vector& x, const Vector& y, double amplitude, const Vector& length_scales);

struct GpState {
    std::vector<Vector> xs;
    std::vector<double> ys;
    double amplitude = 1.0;    ///< zeta_0
    Vector length_scales;      ///< zeta_1..zeta_D
    double noise_var = 0.0;    ///< eta^2
    double mean_const = 0.0;

    std::size_t size() const { return xs.size(); }
};

struct GpPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Relative jitter steps tried in turn, in units of the amplitude.
inline constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

/// Factorizes the Gram matrix once for repeated predictions.
class GpPosterior {
public:
    explicit GpPosterior(GpState state);

    GpPrediction predict(const Vector& x) const;
    const GpState& state() const { return state_; }
    double jitter() const { return jitter_; }
    /// Log marginal likelihood of the evidence.
    double log_marginal_likelihood() const;

private:
    GpState state_;
    Eigen::LLT<Matrix> llt_;
    Vector alpha_;
    double jitter_ = 0.0;
};

GpPrediction gp_posterior(const GpState& state, const Vector& x);

/// Gram matrix K(X, X) without noise.
Matrix gram_matrix(const std::vector<Vector>& xs, double amplitude, const Vector& length_scales);

/// (mu - best) Phi(z) + sigma phi(z); max(0, mu - best) when sigma = 0.
double expected_improvement(double mean, double variance, double best);
double expected_improvement(const GpPosterior& gp, const Vector& x, double best);

double log_marginal_likelihood(const GpState& state);

/// Box constraints for hyperparameter fitting. Amplitude and noise bounds are
/// relative to the sample variance of y (floored at 1e-12).
struct HyperBounds {
    double amplitude_lo = 1e-4, amplitude_hi = 1e2;
    double length_lo = 1e-2, length_hi = 1e1;
    double noise_lo = 1e-8, noise_hi = 1.0;
};

struct HyperFit {
    double amplitude = 1.0;
    Vector length_scales;
    double noise_var = 0.0;
    double mean_const = 0.0;
    double log_marginal_likelihood = 0.0;
    bool fallback = false;  ///< every start failed; heuristic values returned
};

/// Multi-start Nelder-Mead on the log marginal likelihood. The evidence is
/// put in a canonical order first, so the result does not depend on the
/// order in which points were supplied.
HyperFit fit_hyperparameters(const std::vector<Vector>& xs, const std::vector<double>& ys,
                             const HyperBounds& bounds, std::uint64_t seed, int n_starts = 5);

/// Median-distance length scales, amplitude var(y), noise 10% of amplitude.
HyperFit heuristic_hyperparameters(const std::vector<Vector>& xs, const std::vector<double>& ys);

GpState make_state(std::vector<Vector> xs, std::vector<double> ys, const HyperFit& fit);

}  // namespace bobgmm
