// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include "bobgmm/draws.hpp"
#include "bobgmm/objective.hpp"
#include "bobgmm/oracle.hpp"
#include "bobgmm/parallel.hpp"
#include "bobgmm/predictive.hpp"
#include "bobgmm/simulation.hpp"
#include "bobgmm/init.hpp"

#include <benchmark/benchmark.h>

using namespace bobgmm;

namespace {

struct Fixture {
    Matrix Y;
    LabelMatrix Z;
    NiwDirichletPrior prior;
    GmmParams init;
    std::vector<GmmParams> draws;

    Fixture() {
        auto sim = generate_simulation(sim_setting(1), 1);
        Y = standardize(sim.Y).first;
        Z = sim.Z;
        prior = NiwDirichletPrior::symmetric(2, 5, 1.1, 1.0, 7.0);
        init = init_params(Y, 2, 3, 1, prior).params;
        draws = sample_bayes_posterior(posterior_hyper(Y, Z, prior), 2000, 1);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void BM_WeightedDraws(benchmark::State& st) {
    const auto& f = fixture();
    WeightScheme scheme = WeightScheme::of(WeightVariant::wbb1);
    for (auto _ : st) {
        auto out = solve_weighted_draws(f.Y, f.prior, f.init, scheme, EmSettings{}, 1, StreamTag::weights, 0, 200,
                                        exec_of(st));
        benchmark::DoNotOptimize(out);
    }
    st.SetItemsProcessed(st.iterations() * 200);
}

void BM_Objective(benchmark::State& st) {
    const auto& f = fixture();
    const std::vector<GmmParams> batch(f.draws.begin(), f.draws.begin() + 500);
    for (auto _ : st) {
        auto est = objective_from_draws(batch, f.Y, f.prior, BandwidthRule::silverman, 1e-3, exec_of(st));
        benchmark::DoNotOptimize(est);
    }
}

void BM_Oracle(benchmark::State& st) {
    const auto& f = fixture();
    const auto hyper = posterior_hyper(f.Y, f.Z, f.prior);
    for (auto _ : st) {
        auto d = sample_bayes_posterior(hyper, 5000, 2, exec_of(st));
        benchmark::DoNotOptimize(d);
    }
    st.SetItemsProcessed(st.iterations() * 5000);
}

void BM_Predictive(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) {
        auto pd = sample_predictive(f.draws, 3, 0, "bench", exec_of(st));
        benchmark::DoNotOptimize(pd);
    }
}

}  // namespace

BENCHMARK(BM_WeightedDraws)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Objective)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Oracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predictive)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
