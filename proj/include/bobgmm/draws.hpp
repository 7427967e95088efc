#pragma once

#include "bobgmm/parallel.hpp"
#include "bobgmm/rng.hpp"
#include "bobgmm/weighting.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bobgmm {

/// Result of one weighted-EM solve.
struct DrawOutcome {
    std::optional<GmmParams> params;  ///< empty when EM failed
    EmDiagnostics diagnostics;
    std::string error;
};

/// Stream used for draw s of a batch: stream_id(tag, major, s).
StreamRng draw_stream(std::uint64_t seed, StreamTag tag, std::uint64_t major, std::size_t s);

/// Draws `count` weight vectors and solves each weighted MAP problem from
/// `init`. Draw s depends only on (seed, tag, major, s), never on `exec`.
std::vector<DrawOutcome> solve_weighted_draws(const Matrix& Y, const NiwDirichletPrior& prior, const GmmParams& init,
                                              const WeightScheme& scheme, const EmSettings& em, std::uint64_t seed,
                                              StreamTag tag, std::uint64_t major, std::size_t count, Exec exec);

std::size_t count_failures(const std::vector<DrawOutcome>& outcomes);

}  // namespace bobgmm
