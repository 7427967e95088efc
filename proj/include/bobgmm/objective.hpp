#pragma once

#include "bobgmm/bayes_opt.hpp"
#include "bobgmm/draws.hpp"
#include "bobgmm/kde.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace bobgmm {

struct BobConfig {
    int batch_size = 500;  ///< S_b
    SearchBox search_space;
    EmSettings em;
    BandwidthRule bandwidth_rule = BandwidthRule::silverman;
    double fallback_bandwidth = 1e-3;
    double max_failure_fraction = 0.1;
    Exec exec = Exec::parallel;
    LikelihoodScale likelihood_scale = LikelihoodScale::unit;
};

/// Default box: lower (1, 1e-5, ...), upper all `upper`.
SearchBox default_bob_box(int K, double upper = 1.5);

void validate(const BobConfig& cfg, int K);

/// Per-draw pieces of the estimate; value = mean(summands).
struct ObjectiveEstimate {
    double value = 0.0;
    std::vector<double> summands;  ///< kde_terms - log_priors - log_likelihoods
    std::vector<double> kde_terms;
    std::vector<double> log_priors;
    std::vector<double> log_likelihoods;
    Matrix flat_draws;             ///< successful draws, one row each
    std::size_t n_failed = 0;
    std::size_t n_degenerate_coordinates = 0;

    double std_error() const;
};

/// The estimate computed from an already-solved batch.
ObjectiveEstimate objective_from_draws(const std::vector<GmmParams>& draws, const Matrix& Y,
                                       const NiwDirichletPrior& prior, BandwidthRule rule,
                                       double fallback_bandwidth = 1e-3, Exec exec = Exec::parallel);

/// Raised when more than the allowed fraction of EM solves fail.
class ObjectiveFailure : public Error {
public:
    using Error::Error;
};

/// Batch of S_b BOB(x) draws from streams (objective, eval_index, s), then
/// the per-coordinate KDE estimate of the reverse KL up to a constant.
ObjectiveEstimate estimate_objective(const Vector& x, const Matrix& Y, const NiwDirichletPrior& prior,
                                     const GmmParams& init, const BobConfig& cfg, std::uint64_t seed,
                                     std::uint64_t eval_index);

/// -estimate_objective(...).value, or nullopt when the evaluation fails.
std::optional<double> objective_for_optimizer(const Vector& x, const Matrix& Y, const NiwDirichletPrior& prior,
                                              const GmmParams& init, const BobConfig& cfg, std::uint64_t seed,
                                              std::uint64_t eval_index);

/// Audit dump: flat coordinates plus the per-draw terms, one row per draw.
void write_objective_csv(std::ostream& os, const ObjectiveEstimate& est, int K, int d);

}  // namespace bobgmm
