#pragma once

#include <span>
#include <string>
#include <vector>

namespace bobgmm {

enum class BandwidthRule { silverman };

BandwidthRule parse_bandwidth_rule(const std::string& name);

/// 1.06 * min(sd, IQR / 1.34) * n^(-1/5); falls back to sd when the IQR is
/// zero. Returns 0 for constant samples.
double silverman_bandwidth(std::span<const double> samples);

/// Univariate Gaussian-kernel density estimate.
class Kde1d {
public:
    Kde1d(std::vector<double> centers, double bandwidth, double floor = 1e-300);

    /// log of max(floor, density). Only kernels within (nearest distance +
    /// 10 bandwidths) are summed; the rest contribute below e^-50 relative.
    double logpdf(double x) const;
    double pdf(double x) const;

    double bandwidth() const { return bandwidth_; }
    double floor() const { return floor_; }
    const std::vector<double>& centers() const { return centers_; }

private:
    std::vector<double> centers_;  // sorted
    double bandwidth_;
    double floor_;
    double log_norm_;
};

struct KdeFit {
    Kde1d kde;
    bool degenerate = false;  ///< constant samples; fallback bandwidth used
};

KdeFit kde_fit(std::span<const double> samples, BandwidthRule rule = BandwidthRule::silverman,
               double fallback_bandwidth = 1e-3);

}  // namespace bobgmm
