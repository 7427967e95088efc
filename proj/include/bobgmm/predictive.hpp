#pragma once

#include "bobgmm/gmm.hpp"
#include "bobgmm/parallel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bobgmm {

struct PredictiveDraws {
    Matrix samples;  ///< one row per posterior draw
    std::string source_label;
};

/// One y_new per draw: z ~ Categorical(pi), y ~ N(mu_z, Sigma_z). Row s uses
/// stream (predictive, stream_major, s).
PredictiveDraws sample_predictive(const std::vector<GmmParams>& draws, std::uint64_t seed,
                                  std::uint64_t stream_major, std::string label, Exec exec = Exec::parallel);

inline constexpr int kDefaultTvBins = 20;

/// Half the L1 distance between equal-width binned pmfs over the pooled
/// range of each coordinate, averaged over coordinates.
double tv_hat(const Matrix& A, const Matrix& B, int bins = kDefaultTvBins);
double tv_hat(const PredictiveDraws& A, const PredictiveDraws& B, int bins = kDefaultTvBins);

/// Two-sample Kolmogorov-Smirnov statistic averaged over coordinates.
double ks_hat(const Matrix& A, const Matrix& B);
double ks_hat(const PredictiveDraws& A, const PredictiveDraws& B);

/// Per-coordinate versions.
double tv_1d(std::vector<double> a, std::vector<double> b, int bins);
double ks_1d(std::vector<double> a, std::vector<double> b);

}  // namespace bobgmm
