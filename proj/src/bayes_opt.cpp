#include "bobgmm/bayes_opt.hpp"

#include "bobgmm/errors.hpp"

#include <boost/random/sobol.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace bobgmm {

bool SearchBox::contains(const Vector& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Vector SearchBox::to_unit(const Vector& x) const {
    Vector u(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double w = upper(j) - lower(j);
        u(j) = w > 0.0 ? (x(j) - lower(j)) / w : 0.0;
    }
    return u;
}

Vector SearchBox::from_unit(const Vector& u) const {
    Vector x(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        const double w = upper(j) - lower(j);
        x(j) = w > 0.0 ? std::clamp(lower(j) + w * u(j), lower(j), upper(j)) : lower(j);
    }
    return x;
}

void validate(const SearchBox& box) {
    if (box.lower.size() != box.upper.size() || box.lower.size() == 0)
        throw DimensionError("search box bounds must be non-empty and of equal length");
    if (!box.lower.allFinite() || !box.upper.allFinite()) throw InvalidArgument("search box bounds must be finite");
    if ((box.lower.array() > box.upper.array()).any()) throw InvalidArgument("search box has lower > upper");
}

void validate(const BoBudget& budget) {
    if (budget.n_init < 2) throw InvalidArgument("BO budget needs n_init >= 2");
    if (budget.n_iter < 0) throw InvalidArgument("BO budget needs n_iter >= 0");
}

double incumbent_value(const GpPosterior& gp, IncumbentRule rule) {
    const auto& s = gp.state();
    if (s.xs.empty()) throw InvalidArgument("incumbent needs evidence");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
        const double v = rule == IncumbentRule::raw_best ? s.ys[i] : gp.predict(s.xs[i]).mean;
        best = std::max(best, v);
    }
    return best;
}

namespace {

struct EiProblem {
    const GpPosterior* gp;
    double best;
};

double negative_ei(const gsl_vector* z, void* params) {
    const auto* p = static_cast<const EiProblem*>(params);
    Vector u(static_cast<Eigen::Index>(z->size));
    for (std::size_t j = 0; j < z->size; ++j) u(static_cast<Eigen::Index>(j)) = std::clamp(gsl_vector_get(z, j), 0.0, 1.0);
    return -expected_improvement(*p->gp, u, p->best);
}

}  // namespace

Vector propose_next_unit(const GpPosterior& gp, double best, const AcquisitionSettings& settings,
                         std::uint64_t shift_seed) {
    const int D = static_cast<int>(gp.state().length_scales.size());
    if (D < 1) throw DimensionError("propose_next: zero-dimensional space");
    if (settings.n_candidates < 1) throw InvalidArgument("propose_next needs candidates");

    StreamRng shift_rng(shift_seed, stream_id(StreamTag::bayes_opt, 0x5368));
    Vector shift(D);
    for (int j = 0; j < D; ++j) shift(j) = shift_rng.uniform();

    boost::random::sobol qrng(static_cast<std::size_t>(D));
    const int N = settings.n_candidates;
    Matrix cand(N, D);
    Vector ei(N), var(N);
    for (int c = 0; c < N; ++c) {
        for (int j = 0; j < D; ++j) {
            double u = std::ldexp(static_cast<double>(qrng() >> 11), -53) + shift(j);
            cand(c, j) = u - std::floor(u);
        }
        const auto p = gp.predict(cand.row(c).transpose());
        ei(c) = expected_improvement(p.mean, p.variance, best);
        var(c) = p.variance;
    }

    if (!(ei.maxCoeff() > 0.0)) {
        Eigen::Index arg = 0;
        var.maxCoeff(&arg);
        return cand.row(arg).transpose();
    }

    std::vector<int> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), 0);
    const int n_refine = std::clamp(settings.n_refine, 0, N);
    std::partial_sort(order.begin(), order.begin() + n_refine, order.end(),
                      [&](int a, int b) { return ei(a) > ei(b) || (ei(a) == ei(b) && a < b); });

    Vector best_u = cand.row(order.front()).transpose();
    double best_ei = ei(order.front());
    if (n_refine == 0) return best_u;

    gsl_set_error_handler_off();
    EiProblem problem{&gp, best};
    gsl_multimin_function fn{&negative_ei, static_cast<std::size_t>(D), &problem};
    gsl_vector* z = gsl_vector_alloc(static_cast<std::size_t>(D));
    gsl_vector* step = gsl_vector_alloc(static_cast<std::size_t>(D));
    gsl_vector_set_all(step, 0.05);
    gsl_multimin_fminimizer* solver =
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, static_cast<std::size_t>(D));
    for (int r = 0; r < n_refine; ++r) {
        const int c = order[static_cast<std::size_t>(r)];
        for (int j = 0; j < D; ++j) gsl_vector_set(z, static_cast<std::size_t>(j), cand(c, j));
        gsl_multimin_fminimizer_set(solver, &fn, z, step);
        for (int it = 0; it < 100 * D; ++it) {
            if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-7) == GSL_SUCCESS) break;
        }
        const gsl_vector* xz = gsl_multimin_fminimizer_x(solver);
        Vector u(D);
        for (int j = 0; j < D; ++j) u(j) = std::clamp(gsl_vector_get(xz, static_cast<std::size_t>(j)), 0.0, 1.0);
        const double v = expected_improvement(gp, u, best);
        if (v > best_ei) {
            best_ei = v;
            best_u = u;
        }
    }
    gsl_multimin_fminimizer_free(solver);
    gsl_vector_free(step);
    gsl_vector_free(z);
    return best_u;
}

Vector propose_next(const GpState& state, const SearchBox& box, const AcquisitionSettings& settings,
                    std::uint64_t shift_seed) {
    validate(box);
    GpState unit = state;
    for (auto& x : unit.xs) x = box.to_unit(x);
    const Vector w = box.upper - box.lower;
    for (Eigen::Index j = 0; j < w.size(); ++j)
        if (w(j) > 0.0) unit.length_scales(j) /= w(j);
    const GpPosterior gp(std::move(unit));
    if (gp.state().xs.empty()) {
        StreamRng rng(shift_seed, stream_id(StreamTag::bayes_opt, 0x7261));
        Vector u(box.dim());
        for (int j = 0; j < box.dim(); ++j) u(j) = rng.uniform();
        return box.from_unit(u);
    }
    return box.from_unit(propose_next_unit(gp, incumbent_value(gp, settings.incumbent), settings, shift_seed));
}

Matrix latin_hypercube(int n, int dim, StreamRng& rng) {
    if (n < 1 || dim < 1) throw InvalidArgument("latin_hypercube needs n >= 1 and dim >= 1");
    Matrix U(n, dim);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int j = 0; j < dim; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            const auto k = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(k)]);
        }
        for (int i = 0; i < n; ++i) U(i, j) = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / n;
    }
    return U;
}

BoResult maximize(const BlackBox& objective, const SearchBox& box, const BoBudget& budget, std::uint64_t seed,
                  const AcquisitionSettings& settings) {
    validate(box);
    validate(budget);
    const int D = box.dim();
    StreamRng rng(seed, stream_id(StreamTag::bayes_opt, 1));

    struct Eval {
        Vector u;
        std::optional<double> y;
    };
    std::vector<Eval> evals;
    BoResult result;
    const auto t0 = std::chrono::steady_clock::now();

    auto evaluate = [&](Vector u) {
        for (int j = 0; j < D; ++j)
            if (!(box.upper(j) > box.lower(j))) u(j) = 0.0;
        const Vector x = box.from_unit(u);
        std::optional<double> y = objective(x);
        if (y && !std::isfinite(*y)) y.reset();
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (y)
            result.trace.push_back({static_cast<int>(evals.size()), x, *y, wall});
        else
            result.failed.push_back(x);
        evals.push_back({std::move(u), y});
    };

    const Matrix design = latin_hypercube(budget.n_init, D, rng);
    for (int i = 0; i < budget.n_init; ++i) evaluate(design.row(i).transpose());

    for (int round = 0; round < budget.n_iter; ++round) {
        std::vector<Vector> xs;
        std::vector<double> ys;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& e : evals)
            if (e.y) {
                lo = std::min(lo, *e.y);
                hi = std::max(hi, *e.y);
            }
        if (!std::isfinite(lo)) {
            Vector u(D);
            for (int j = 0; j < D; ++j) u(j) = rng.uniform();
            evaluate(std::move(u));
            continue;
        }
        const double range = hi - lo;
        const double penalty = lo - 10.0 * (range > 0.0 ? range : 1.0);
        for (const auto& e : evals) {
            xs.push_back(e.u);
            ys.push_back(e.y ? *e.y : penalty);
        }
        const std::uint64_t round_seed = mix64(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(round + 1)));
        const HyperFit fit = xs.size() >= 4
                                 ? fit_hyperparameters(xs, ys, settings.bounds, round_seed, settings.n_hyper_starts)
                                 : heuristic_hyperparameters(xs, ys);
        const GpPosterior gp(make_state(std::move(xs), std::move(ys), fit));
        evaluate(propose_next_unit(gp, incumbent_value(gp, settings.incumbent), settings, round_seed));
    }

    if (result.trace.empty()) throw Error("every objective evaluation failed");
    const auto best = std::max_element(result.trace.begin(), result.trace.end(),
                                       [](const TraceRecord& a, const TraceRecord& b) { return a.value < b.value; });
    result.best_x = best->x;
    result.best_value = best->value;
    return result;
}

}  // namespace bobgmm
