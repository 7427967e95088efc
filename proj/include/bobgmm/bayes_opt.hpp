#pragma once

#include "bobgmm/gp.hpp"
#include "bobgmm/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace bobgmm {

/// Axis-aligned search box. Zero-width coordinates are allowed and stay fixed.
struct SearchBox {
    Vector lower;
    Vector upper;

    int dim() const { return static_cast<int>(lower.size()); }
    bool contains(const Vector& x) const;
    Vector to_unit(const Vector& x) const;
    Vector from_unit(const Vector& u) const;
};

void validate(const SearchBox& box);

struct BoBudget {
    int n_init = 10;
    int n_iter = 30;
};

void validate(const BoBudget& budget);

enum class IncumbentRule {
    posterior_mean,  ///< best = highest GP mean over evaluated points
    raw_best         ///< best = highest observed value
};

struct AcquisitionSettings {
    int n_candidates = 2048;
    int n_refine = 5;
    IncumbentRule incumbent = IncumbentRule::posterior_mean;
    HyperBounds bounds;
    int n_hyper_starts = 5;
};

/// Maximizes EI over the unit cube: scrambled Sobol candidates plus
/// Nelder-Mead refinement from the best few. Falls back to the candidate of
/// largest posterior variance when EI vanishes everywhere. `shift_seed` drives the
/// Cranley-Patterson rotation of the candidate set.
Vector propose_next_unit(const GpPosterior& gp, double best, const AcquisitionSettings& settings,
                         std::uint64_t shift_seed);

/// Same, in box coordinates: evidence x and the result live in `box`.
Vector propose_next(const GpState& state, const SearchBox& box, const AcquisitionSettings& settings,
                    std::uint64_t shift_seed);

/// Incumbent value for EI.
double incumbent_value(const GpPosterior& gp, IncumbentRule rule);

struct TraceRecord {
    int iteration = 0;     ///< 0-based evaluation index
    Vector x;
    double value = 0.0;    ///< observed objective
    double wall_seconds = 0.0;
};

struct BoResult {
    Vector best_x;
    double best_value = 0.0;
    std::vector<TraceRecord> trace;   ///< successful evaluations only
    std::vector<Vector> failed;       ///< points whose evaluation failed
};

using BlackBox = std::function<std::optional<double>(const Vector& x)>;

/// Latin-hypercube design in the unit cube, n rows x dim columns.
Matrix latin_hypercube(int n, int dim, StreamRng& rng);

/// Sequential GP-EI maximization. Failed evaluations (nullopt) enter the GP
/// as a penalty below every finite observation and are left out of the trace.
BoResult maximize(const BlackBox& objective, const SearchBox& box, const BoBudget& budget, std::uint64_t seed,
                  const AcquisitionSettings& settings = {});

}  // namespace bobgmm
