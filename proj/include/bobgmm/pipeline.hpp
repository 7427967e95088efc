#pragma once

#include "bobgmm/bayes_opt.hpp"
#include "bobgmm/init.hpp"
#include "bobgmm/objective.hpp"
#include "bobgmm/predictive.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bobgmm {

struct PriorSpec {
    double concentration = 1.1;
    std::optional<double> lambda;  ///< fixed value skips cross-validation
    std::optional<double> nu;
    std::vector<double> grid_lambda;  ///< empty means the default grid
    std::vector<double> grid_nu;
    double split_fraction = 0.75;
};

/// Run-level default: normalized likelihood weights sum to n (see LikelihoodScale).
inline WeightScheme default_run_scheme() {
    WeightScheme s;
    s.likelihood_scale = LikelihoodScale::n;
    return s;
}

struct RunConfig {
    int K = 2;
    WeightScheme scheme = default_run_scheme();
    int S = 2000;
    int batch_size = 500;
    BoBudget bo_budget;
    std::optional<SearchBox> search_box;  ///< default_bob_box(K) when absent
    AcquisitionSettings acquisition;
    PriorSpec prior;
    EmSettings em;
    bool tune_tempering = true;
    int init_restarts = 10;
    double max_failure_fraction = 0.1;
    std::uint64_t seed = 0;
    Exec exec = Exec::parallel;
};

void validate(const RunConfig& cfg);

/// Everything shared by the samplers for one data set: prior after CV, the
/// common initial point and the EM settings with the tuned tempering.
struct Problem {
    Matrix Y;
    NiwDirichletPrior prior;
    GmmParams init;
    EmSettings em;
    double lambda = 1.0;
    double nu = 1.0;
    std::optional<TemperingSelection> tempering;
};

/// Fixed values from the spec, otherwise cross-validation on the spec's grids.
std::pair<double, double> resolve_lambda_nu(const Matrix& Y, const RunConfig& cfg);

/// Y must already be standardized.
Problem prepare_problem(const Matrix& Y, const RunConfig& cfg);

struct DrawSet {
    std::string label;
    std::vector<GmmParams> draws;
    std::vector<EmDiagnostics> diagnostics;
    std::vector<std::size_t> failed;  ///< indices of dropped draws
    double elapsed_seconds = 0.0;
};

/// S weighted-EM solves; draw s uses stream (weights, 0, s). Failed draws
/// are dropped; more than `max_failure_fraction` of them is an error.
DrawSet sample_draws(const Problem& problem, const WeightScheme& scheme, int S, std::uint64_t seed, Exec exec,
                     double max_failure_fraction = 0.1);

struct BobRun {
    DrawSet draws;
    Vector x_star;
    BoResult bo;
    double tune_seconds = 0.0;
};

BobConfig bob_config(const RunConfig& cfg, const Problem& problem);

/// Tunes x by BO (skipped when the box is a single point), then samples
/// under BOB(x*). Elapsed time covers both phases.
BobRun run_bob(const Problem& problem, const RunConfig& cfg);

/// WLB, WBB1 or WBB2 per cfg.scheme.
DrawSet run_wbb(const Problem& problem, const RunConfig& cfg);

struct MethodMetrics {
    std::string method;
    double tv = 0.0;
    double ks = 0.0;
    double elapsed_seconds = 0.0;
    std::size_t S = 0;
    std::uint64_t seed = 0;
};

/// Predictive sets for the oracle (stream major 0) and each method (major
/// m + 1), each from its first S_pred draws, then TV and KS against the oracle.
std::vector<MethodMetrics> compare_methods(const std::vector<GmmParams>& bayes_draws,
                                           const std::vector<DrawSet>& methods, std::size_t S_pred,
                                           std::uint64_t seed, int tv_bins = kDefaultTvBins,
                                           Exec exec = Exec::parallel);

struct MetricSummary {
    std::string method;
    std::size_t runs = 0;
    double tv_median = 0.0, tv_iqr = 0.0;
    double ks_median = 0.0, ks_iqr = 0.0;
    double elapsed_median = 0.0, elapsed_iqr = 0.0;
};

double median(std::vector<double> v);
/// Linear-interpolation quantile.
double quantile(std::vector<double> v, double p);

/// Groups records by method across runs, in first-seen order.
std::vector<MetricSummary> summarize_runs(const std::vector<std::vector<MethodMetrics>>& runs);

}  // namespace bobgmm
