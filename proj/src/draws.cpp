#include "bobgmm/draws.hpp"

#include <algorithm>
#include <exception>

namespace bobgmm {

StreamRng draw_stream(std::uint64_t seed, StreamTag tag, std::uint64_t major, std::size_t s) {
    return StreamRng(seed, stream_id(tag, major, static_cast<std::uint64_t>(s)));
}

std::vector<DrawOutcome> solve_weighted_draws(const Matrix& Y, const NiwDirichletPrior& prior, const GmmParams& init,
                                              const WeightScheme& scheme, const EmSettings& em, std::uint64_t seed,
                                              StreamTag tag, std::uint64_t major, std::size_t count, Exec exec) {
    const int n = static_cast<int>(Y.rows());
    const int K = init.num_components();
    validate(scheme, K);
    check_compatible(init, prior);
    std::vector<DrawOutcome> out(count);
    for_each_index(exec, count, [&](std::size_t s) {
        try {
            StreamRng rng = draw_stream(seed, tag, major, s);
            const WeightDraw w = draw_weights(scheme, n, K, rng);
            EmResult r = run_weighted_em(Y, w, prior, init, em);
            out[s].params = std::move(r.params);
            out[s].diagnostics = std::move(r.diagnostics);
        } catch (const std::exception& e) {
            out[s].error = e.what();
        }
    });
    return out;
}

std::size_t count_failures(const std::vector<DrawOutcome>& outcomes) {
    return static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [](const DrawOutcome& o) { return !o.params; }));
}

}  // namespace bobgmm
