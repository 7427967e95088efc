#include "bobgmm/predictive.hpp"

#include "bobgmm/errors.hpp"
#include "bobgmm/rng.hpp"
#include "bobgmm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace bobgmm {

PredictiveDraws sample_predictive(const std::vector<GmmParams>& draws, std::uint64_t seed,
                                  std::uint64_t stream_major, std::string label, Exec exec) {
    if (draws.empty()) throw InvalidArgument("predictive sampling needs at least one draw");
    const int d = draws.front().dim();
    PredictiveDraws out{Matrix(static_cast<Eigen::Index>(draws.size()), d), std::move(label)};
    std::vector<std::string> errors(draws.size());
    for_each_index(exec, draws.size(), [&](std::size_t s) {
        try {
            const GmmParams& p = draws[s];
            if (p.dim() != d) throw DimensionError("draws differ in dimension");
            StreamRng rng(seed, stream_id(StreamTag::predictive, stream_major, static_cast<std::uint64_t>(s)));
            const double u = rng.uniform();
            int z = p.num_components() - 1;
            double cum = 0.0;
            for (int k = 0; k < p.num_components(); ++k) {
                cum += p.weights(k);
                if (u < cum) {
                    z = k;
                    break;
                }
            }
            while (z > 0 && p.weights(z) <= 0.0) --z;
            out.samples.row(static_cast<Eigen::Index>(s)) =
                sample_mvn(p.means[static_cast<std::size_t>(z)], p.covs[static_cast<std::size_t>(z)], rng).transpose();
        } catch (const std::exception& e) {
            errors[s] = e.what();
        }
    });
    for (std::size_t s = 0; s < draws.size(); ++s)
        if (!errors[s].empty()) throw Error("predictive draw " + std::to_string(s) + ": " + errors[s]);
    return out;
}

double tv_1d(std::vector<double> a, std::vector<double> b, int bins) {
    if (a.empty() || b.empty()) throw InvalidArgument("TV needs non-empty samples");
    if (bins < 1) throw InvalidArgument("TV needs at least one bin");
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    const double lo = std::min(*amin, *bmin);
    const double hi = std::max(*amax, *bmax);
    if (!(hi > lo)) return 0.0;
    const double width = (hi - lo) / bins;
    auto histogram = [&](const std::vector<double>& v) {
        std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
        for (double x : v) {
            auto idx = static_cast<long>(std::floor((x - lo) / width));
            idx = std::clamp(idx, 0L, static_cast<long>(bins - 1));
            h[static_cast<std::size_t>(idx)] += 1.0;
        }
        for (double& c : h) c /= static_cast<double>(v.size());
        return h;
    };
    const auto pa = histogram(a);
    const auto pb = histogram(b);
    double total = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) total += std::abs(pa[i] - pb[i]);
    return std::min(1.0, 0.5 * total);
}

double ks_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("KS needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return sup;
}

namespace {

std::vector<double> column(const Matrix& M, Eigen::Index j) {
    return std::vector<double>(M.col(j).data(), M.col(j).data() + M.rows());
}

void check_pair(const Matrix& A, const Matrix& B) {
    if (A.rows() == 0 || B.rows() == 0) throw InvalidArgument("distance needs non-empty sample sets");
    if (A.cols() != B.cols() || A.cols() == 0) throw DimensionError("sample sets differ in dimension");
}

}  // namespace

double tv_hat(const Matrix& A, const Matrix& B, int bins) {
    check_pair(A, B);
    double total = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) total += tv_1d(column(A, j), column(B, j), bins);
    return total / static_cast<double>(A.cols());
}

double ks_hat(const Matrix& A, const Matrix& B) {
    check_pair(A, B);
    double total = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) total += ks_1d(column(A, j), column(B, j));
    return total / static_cast<double>(A.cols());
}

double tv_hat(const PredictiveDraws& A, const PredictiveDraws& B, int bins) { return tv_hat(A.samples, B.samples, bins); }
double ks_hat(const PredictiveDraws& A, const PredictiveDraws& B) { return ks_hat(A.samples, B.samples); }

}  // namespace bobgmm
