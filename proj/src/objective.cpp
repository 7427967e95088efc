#include "bobgmm/objective.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace bobgmm {

SearchBox default_bob_box(int K, double upper) {
    const int D = bob_dimension(K);
    SearchBox box{Vector::Constant(D, 1e-5), Vector::Constant(D, upper)};
    box.lower(0) = 1.0;
    return box;
}

void validate(const BobConfig& cfg, int K) {
    if (cfg.batch_size < 2) throw InvalidArgument("batch size must be at least 2");
    validate(cfg.search_space);
    if (cfg.search_space.dim() != bob_dimension(K))
        throw DimensionError("search box must have 2(K+1) coordinates");
    if (cfg.search_space.lower(0) < 1.0) throw InvalidArgument("search box must keep x_alpha >= 1");
    if ((cfg.search_space.lower.array() < 0.0).any()) throw InvalidArgument("search box must keep prior weights >= 0");
    if (!(cfg.fallback_bandwidth > 0.0)) throw InvalidArgument("fallback bandwidth must be positive");
    if (!(cfg.max_failure_fraction >= 0.0 && cfg.max_failure_fraction < 1.0))
        throw InvalidArgument("max failure fraction must be in [0, 1)");
}

double ObjectiveEstimate::std_error() const {
    const auto S = summands.size();
    if (S < 2) return 0.0;
    double ss = 0.0;
    for (double v : summands) ss += (v - value) * (v - value);
    return std::sqrt(ss / static_cast<double>(S - 1) / static_cast<double>(S));
}

ObjectiveEstimate objective_from_draws(const std::vector<GmmParams>& draws, const Matrix& Y,
                                       const NiwDirichletPrior& prior, BandwidthRule rule, double fallback_bandwidth,
                                       Exec exec) {
    if (draws.size() < 2) throw InvalidArgument("objective needs at least two draws");
    const int K = draws.front().num_components();
    const int d = draws.front().dim();
    const int M = flat_size(K, d);
    const auto S = static_cast<Eigen::Index>(draws.size());

    ObjectiveEstimate est;
    est.flat_draws.resize(S, M);
    for (Eigen::Index s = 0; s < S; ++s) est.flat_draws.row(s) = flatten(draws[static_cast<std::size_t>(s)]).transpose();

    // Per-coordinate KDE log densities at the fitting samples.
    Matrix log_g(S, M);
    std::vector<char> degenerate(static_cast<std::size_t>(M), 0);
    for_each_index(exec, static_cast<std::size_t>(M), [&](std::size_t j) {
        const Vector col = est.flat_draws.col(static_cast<Eigen::Index>(j));
        const KdeFit fit = kde_fit(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), rule,
                                   fallback_bandwidth);
        degenerate[j] = fit.degenerate ? 1 : 0;
        for (Eigen::Index s = 0; s < S; ++s) log_g(s, static_cast<Eigen::Index>(j)) = fit.kde.logpdf(col(s));
    });
    for (char c : degenerate) est.n_degenerate_coordinates += static_cast<std::size_t>(c);

    est.kde_terms.resize(draws.size());
    est.log_priors.resize(draws.size());
    est.log_likelihoods.resize(draws.size());
    est.summands.resize(draws.size());
    for_each_index(exec, draws.size(), [&](std::size_t s) {
        est.kde_terms[s] = log_g.row(static_cast<Eigen::Index>(s)).sum();
        est.log_priors[s] = log_prior(draws[s], prior);
        try {
            est.log_likelihoods[s] = log_likelihood(Y, draws[s]);
        } catch (const NonFiniteResult&) {
            est.log_likelihoods[s] = -std::numeric_limits<double>::infinity();
        }
        est.summands[s] = est.kde_terms[s] - est.log_priors[s] - est.log_likelihoods[s];
    });
    double total = 0.0;
    for (double v : est.summands) total += v;
    est.value = total / static_cast<double>(S);
    if (!std::isfinite(est.value)) throw NonFiniteResult("objective estimate is not finite");
    return est;
}

ObjectiveEstimate estimate_objective(const Vector& x, const Matrix& Y, const NiwDirichletPrior& prior,
                                     const GmmParams& init, const BobConfig& cfg, std::uint64_t seed,
                                     std::uint64_t eval_index) {
    const int K = init.num_components();
    validate(cfg, K);
    WeightScheme scheme = WeightScheme::bob(x);
    scheme.likelihood_scale = cfg.likelihood_scale;
    const auto outcomes =
        solve_weighted_draws(Y, prior, init, scheme, cfg.em, seed, StreamTag::objective, eval_index,
                             static_cast<std::size_t>(cfg.batch_size), cfg.exec);
    const std::size_t failed = count_failures(outcomes);
    if (static_cast<double>(failed) > cfg.max_failure_fraction * static_cast<double>(outcomes.size()))
        throw ObjectiveFailure(std::to_string(failed) + " of " + std::to_string(outcomes.size()) +
                               " EM solves failed");
    std::vector<GmmParams> draws;
    draws.reserve(outcomes.size() - failed);
    for (const auto& o : outcomes)
        if (o.params) draws.push_back(*o.params);
    ObjectiveEstimate est = objective_from_draws(draws, Y, prior, cfg.bandwidth_rule, cfg.fallback_bandwidth, cfg.exec);
    est.n_failed = failed;
    return est;
}

std::optional<double> objective_for_optimizer(const Vector& x, const Matrix& Y, const NiwDirichletPrior& prior,
                                              const GmmParams& init, const BobConfig& cfg, std::uint64_t seed,
                                              std::uint64_t eval_index) {
    try {
        return -estimate_objective(x, Y, prior, init, cfg, seed, eval_index).value;
    } catch (const ObjectiveFailure&) {
        return std::nullopt;
    } catch (const NonFiniteResult&) {
        return std::nullopt;
    }
}

void write_objective_csv(std::ostream& os, const ObjectiveEstimate& est, int K, int d) {
    const auto labels = flat_labels(K, d);
    for (const auto& l : labels) os << l << ',';
    os << "kde_term,log_prior,log_likelihood,summand\n";
    os << std::setprecision(17);
    for (Eigen::Index s = 0; s < est.flat_draws.rows(); ++s) {
        for (Eigen::Index j = 0; j < est.flat_draws.cols(); ++j) os << est.flat_draws(s, j) << ',';
        const auto i = static_cast<std::size_t>(s);
        os << est.kde_terms[i] << ',' << est.log_priors[i] << ',' << est.log_likelihoods[i] << ',' << est.summands[i]
           << '\n';
    }
}

}  // namespace bobgmm
