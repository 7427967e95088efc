#include "bobgmm/kde.hpp"

#include "bobgmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

namespace bobgmm {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kWindow = 10.0;

double quantile_sorted(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

BandwidthRule parse_bandwidth_rule(const std::string& name) {
    if (name == "silverman") return BandwidthRule::silverman;
    throw InvalidArgument("unknown bandwidth rule '" + name + "'");
}

double silverman_bandwidth(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw InvalidArgument("bandwidth selection needs at least two samples");
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) return 0.0;
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 1.06 * spread * std::pow(static_cast<double>(n), -0.2);
}

Kde1d::Kde1d(std::vector<double> centers, double bandwidth, double floor)
    : centers_(std::move(centers)), bandwidth_(bandwidth), floor_(floor) {
    if (centers_.empty()) throw InvalidArgument("KDE needs at least one center");
    if (!(bandwidth_ > 0.0)) throw InvalidArgument("KDE bandwidth must be positive");
    if (!(floor_ > 0.0)) throw InvalidArgument("KDE density floor must be positive");
    std::sort(centers_.begin(), centers_.end());
    log_norm_ = std::log(static_cast<double>(centers_.size()) * bandwidth_) + kLogSqrt2Pi;
}

double Kde1d::logpdf(double x) const {
    const double h = bandwidth_;
    auto it = std::lower_bound(centers_.begin(), centers_.end(), x);
    double nearest = std::numeric_limits<double>::infinity();
    if (it != centers_.end()) nearest = *it - x;
    if (it != centers_.begin()) nearest = std::min(nearest, x - *std::prev(it));
    const double reach = nearest + kWindow * h;
    const auto lo = std::lower_bound(centers_.begin(), centers_.end(), x - reach);
    const auto hi = std::upper_bound(lo, centers_.end(), x + reach);

    const double top = -0.5 * (nearest / h) * (nearest / h);
    double sum = 0.0;
    for (auto c = lo; c != hi; ++c) {
        const double z = (x - *c) / h;
        sum += std::exp(-0.5 * z * z - top);
    }
    const double value = top + std::log(sum) - log_norm_;
    return std::max(value, std::log(floor_));
}

double Kde1d::pdf(double x) const { return std::exp(logpdf(x)); }

KdeFit kde_fit(std::span<const double> samples, BandwidthRule rule, double fallback_bandwidth) {
    if (samples.size() < 2) throw InvalidArgument("KDE needs at least two samples");
    double h = 0.0;
    switch (rule) {
    case BandwidthRule::silverman: h = silverman_bandwidth(samples); break;
    }
    const bool degenerate = !(h > 0.0);
    return KdeFit{Kde1d(std::vector<double>(samples.begin(), samples.end()), degenerate ? fallback_bandwidth : h),
                  degenerate};
}

}  // namespace bobgmm
