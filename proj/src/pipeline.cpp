#include "bobgmm/pipeline.hpp"

#include "bobgmm/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <tuple>

namespace bobgmm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void validate(const RunConfig& cfg) {
    if (cfg.K < 2) throw InvalidArgument("K must be at least 2");
    if (cfg.S < 1) throw InvalidArgument("S must be at least 1");
    if (cfg.batch_size < 2) throw InvalidArgument("batch size must be at least 2");
    if (cfg.init_restarts < 1) throw InvalidArgument("init_restarts must be at least 1");
    validate(cfg.bo_budget);
    if (cfg.scheme.variant != WeightVariant::bob) validate(cfg.scheme, cfg.K);
    if (cfg.search_box) validate(*cfg.search_box);
}

std::pair<double, double> resolve_lambda_nu(const Matrix& Y, const RunConfig& cfg) {
    if (cfg.prior.lambda && cfg.prior.nu) return {*cfg.prior.lambda, *cfg.prior.nu};
    const int d = static_cast<int>(Y.cols());
    auto grid_l = cfg.prior.grid_lambda.empty() ? default_lambda_grid() : cfg.prior.grid_lambda;
    auto grid_n = cfg.prior.grid_nu.empty() ? default_nu_grid(d) : cfg.prior.grid_nu;
    if (cfg.prior.lambda) grid_l = {*cfg.prior.lambda};
    if (cfg.prior.nu) grid_n = {*cfg.prior.nu};
    CvOptions opt;
    opt.concentration = cfg.prior.concentration;
    opt.n_restarts = std::min(cfg.init_restarts, 5);
    const CvResult cv = cv_select_lambda_nu(Y, cfg.K, grid_l, grid_n, cfg.prior.split_fraction, cfg.seed, opt);
    return {cv.lambda, cv.nu};
}

Problem prepare_problem(const Matrix& Y, const RunConfig& cfg) {
    validate(cfg);
    const int d = static_cast<int>(Y.cols());
    Problem p;
    p.Y = Y;
    std::tie(p.lambda, p.nu) = resolve_lambda_nu(Y, cfg);
    p.prior = NiwDirichletPrior::symmetric(cfg.K, d, cfg.prior.concentration, p.lambda, p.nu);
    p.init = init_params(Y, cfg.K, cfg.init_restarts, cfg.seed, p.prior).params;
    p.em = cfg.em;
    if (cfg.tune_tempering && !cfg.em.profile) {
        EmSettings unt = cfg.em;
        unt.record_trace = false;
        p.tempering = tune_tempering(Y, p.prior, default_tempering_grid(), p.init, unt);
        p.em.profile = p.tempering->profile;
    }
    return p;
}

DrawSet sample_draws(const Problem& problem, const WeightScheme& scheme, int S, std::uint64_t seed, Exec exec,
                     double max_failure_fraction) {
    if (S < 1) throw InvalidArgument("S must be at least 1");
    const auto t0 = std::chrono::steady_clock::now();
    const auto outcomes = solve_weighted_draws(problem.Y, problem.prior, problem.init, scheme, problem.em, seed,
                                               StreamTag::weights, 0, static_cast<std::size_t>(S), exec);
    DrawSet out;
    out.label = to_string(scheme.variant);
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        if (outcomes[s].params) {
            out.draws.push_back(*outcomes[s].params);
            out.diagnostics.push_back(outcomes[s].diagnostics);
        } else {
            out.failed.push_back(s);
        }
    }
    if (static_cast<double>(out.failed.size()) > max_failure_fraction * static_cast<double>(S))
        throw Error(out.label + ": " + std::to_string(out.failed.size()) + " of " + std::to_string(S) +
                    " draws failed (first: " + outcomes[out.failed.front()].error + ")");
    if (out.draws.empty()) throw Error(out.label + ": every draw failed");
    out.elapsed_seconds = seconds_since(t0);
    return out;
}

BobConfig bob_config(const RunConfig& cfg, const Problem& problem) {
    BobConfig bc;
    bc.batch_size = cfg.batch_size;
    bc.search_space = cfg.search_box ? *cfg.search_box : default_bob_box(cfg.K);
    bc.em = problem.em;
    bc.max_failure_fraction = cfg.max_failure_fraction;
    bc.exec = cfg.exec;
    bc.likelihood_scale = cfg.scheme.likelihood_scale;
    return bc;
}

BobRun run_bob(const Problem& problem, const RunConfig& cfg) {
    validate(cfg);
    if (cfg.scheme.variant != WeightVariant::bob) throw InvalidArgument("run_bob needs the bob scheme");
    const BobConfig bc = bob_config(cfg, problem);
    validate(bc, cfg.K);

    BobRun run;
    const auto t0 = std::chrono::steady_clock::now();
    if ((bc.search_space.upper.array() == bc.search_space.lower.array()).all()) {
        run.x_star = bc.search_space.lower;
    } else {
        std::uint64_t eval_index = 0;
        const BlackBox f = [&](const Vector& x) {
            return objective_for_optimizer(x, problem.Y, problem.prior, problem.init, bc, cfg.seed, eval_index++);
        };
        run.bo = maximize(f, bc.search_space, cfg.bo_budget, cfg.seed, cfg.acquisition);
        run.x_star = run.bo.best_x;
    }
    run.tune_seconds = seconds_since(t0);
    WeightScheme tuned = WeightScheme::bob(run.x_star);
    tuned.likelihood_scale = cfg.scheme.likelihood_scale;
    run.draws = sample_draws(problem, tuned, cfg.S, cfg.seed, cfg.exec,
                             cfg.max_failure_fraction);
    run.draws.elapsed_seconds += run.tune_seconds;
    return run;
}

DrawSet run_wbb(const Problem& problem, const RunConfig& cfg) {
    validate(cfg);
    if (cfg.scheme.variant == WeightVariant::bob) throw InvalidArgument("run_wbb needs a wlb/wbb1/wbb2 scheme");
    return sample_draws(problem, cfg.scheme, cfg.S, cfg.seed, cfg.exec, cfg.max_failure_fraction);
}

std::vector<MethodMetrics> compare_methods(const std::vector<GmmParams>& bayes_draws,
                                           const std::vector<DrawSet>& methods, std::size_t S_pred,
                                           std::uint64_t seed, int tv_bins, Exec exec) {
    if (bayes_draws.empty()) throw InvalidArgument("compare_methods needs oracle draws");
    if (S_pred < 1) throw InvalidArgument("S_pred must be at least 1");
    auto head = [&](const std::vector<GmmParams>& v) {
        return std::vector<GmmParams>(v.begin(), v.begin() + static_cast<long>(std::min(S_pred, v.size())));
    };
    const PredictiveDraws ref = sample_predictive(head(bayes_draws), seed, 0, "bayes", exec);
    std::vector<MethodMetrics> out;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        const auto& set = methods[m];
        if (set.draws.empty()) throw InvalidArgument(set.label + ": no draws to compare");
        if (set.draws.front().dim() != ref.samples.cols()) throw DimensionError(set.label + ": dimension differs");
        const PredictiveDraws pd = sample_predictive(head(set.draws), seed, m + 1, set.label, exec);
        out.push_back({set.label, tv_hat(ref, pd, tv_bins), ks_hat(ref, pd), set.elapsed_seconds,
                       static_cast<std::size_t>(pd.samples.rows()), seed});
    }
    return out;
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw InvalidArgument("quantile of an empty set");
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

std::vector<MetricSummary> summarize_runs(const std::vector<std::vector<MethodMetrics>>& runs) {
    std::vector<std::string> order;
    for (const auto& run : runs)
        for (const auto& m : run)
            if (std::find(order.begin(), order.end(), m.method) == order.end()) order.push_back(m.method);
    std::vector<MetricSummary> out;
    for (const auto& name : order) {
        std::vector<double> tv, ks, el;
        for (const auto& run : runs)
            for (const auto& m : run)
                if (m.method == name) {
                    tv.push_back(m.tv);
                    ks.push_back(m.ks);
                    el.push_back(m.elapsed_seconds);
                }
        MetricSummary s;
        s.method = name;
        s.runs = tv.size();
        s.tv_median = median(tv);
        s.tv_iqr = quantile(tv, 0.75) - quantile(tv, 0.25);
        s.ks_median = median(ks);
        s.ks_iqr = quantile(ks, 0.75) - quantile(ks, 0.25);
        s.elapsed_median = median(el);
        s.elapsed_iqr = quantile(el, 0.75) - quantile(el, 0.25);
        out.push_back(s);
    }
    return out;
}

}  // namespace bobgmm
