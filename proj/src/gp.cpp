#include "bobgmm/gp.hpp"

#include "bobgmm/errors.hpp"
#include "bobgmm/rng.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace bobgmm {

double matern25(const Vector& x, const Vector& y, double amplitude, const Vector& length_scales) {
    if (x.size() != y.size() || x.size() != length_scales.size())
        throw DimensionError("matern25: dimension mismatch");
    const double r2 = ((x - y).array() / length_scales.array()).square().sum();
    const double s = std::sqrt(5.0 * r2);
    return amplitude * (1.0 + s + 5.0 / 3.0 * r2) * std::exp(-s);
}

Matrix gram_matrix(const std::vector<Vector>& xs, double amplitude, const Vector& length_scales) {
    const auto m = static_cast<Eigen::Index>(xs.size());
    Matrix G(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        G(i, i) = amplitude;
        for (Eigen::Index j = 0; j < i; ++j) G(i, j) = G(j, i) = matern25(xs[i], xs[j], amplitude, length_scales);
    }
    return G;
}

namespace {

void check_state(const GpState& s) {
    if (s.xs.size() != s.ys.size()) throw DimensionError("GP evidence: x and y counts differ");
    if (!(s.amplitude > 0.0)) throw InvalidArgument("GP amplitude must be positive");
    if (!(s.noise_var >= 0.0)) throw InvalidArgument("GP noise variance must be non-negative");
    if ((s.length_scales.array() <= 0.0).any()) throw InvalidArgument("GP length scales must be positive");
    for (const auto& x : s.xs)
        if (x.size() != s.length_scales.size()) throw DimensionError("GP evidence point has wrong dimension");
}

}  // namespace

GpPosterior::GpPosterior(GpState state) : state_(std::move(state)) {
    check_state(state_);
    if (state_.xs.empty()) return;
    Matrix G = gram_matrix(state_.xs, state_.amplitude, state_.length_scales);
    G.diagonal().array() += state_.noise_var;
    const Eigen::Index m = G.rows();
    Vector r(m);
    for (Eigen::Index i = 0; i < m; ++i) r(i) = state_.ys[static_cast<std::size_t>(i)] - state_.mean_const;
    for (double step : kJitterLadder) {
        Matrix Gj = G;
        Gj.diagonal().array() += step * state_.amplitude;
        llt_.compute(Gj);
        if (llt_.info() == Eigen::Success) {
            jitter_ = step * state_.amplitude;
            alpha_ = llt_.solve(r);
            return;
        }
    }
    throw NotPositiveDefinite("GP Gram matrix not positive definite after maximal jitter");
}

GpPrediction GpPosterior::predict(const Vector& x) const {
    if (state_.xs.empty()) return {state_.mean_const, state_.amplitude};
    const auto m = static_cast<Eigen::Index>(state_.xs.size());
    Vector k(m);
    for (Eigen::Index i = 0; i < m; ++i)
        k(i) = matern25(x, state_.xs[static_cast<std::size_t>(i)], state_.amplitude, state_.length_scales);
    const double mean = state_.mean_const + k.dot(alpha_);
    const Vector v = llt_.matrixL().solve(k);
    double var = state_.amplitude - v.squaredNorm();
    if (var < 0.0) var = 0.0;
    return {mean, var};
}

double GpPosterior::log_marginal_likelihood() const {
    if (state_.xs.empty()) return 0.0;
    const auto m = static_cast<Eigen::Index>(state_.xs.size());
    Vector r(m);
    for (Eigen::Index i = 0; i < m; ++i) r(i) = state_.ys[static_cast<std::size_t>(i)] - state_.mean_const;
    const Matrix L = llt_.matrixL();
    return -0.5 * r.dot(alpha_) - L.diagonal().array().log().sum() -
           0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);
}

GpPrediction gp_posterior(const GpState& state, const Vector& x) { return GpPosterior(state).predict(x); }

double expected_improvement(double mean, double variance, double best) {
    const double gap = mean - best;
    if (!(variance > 0.0)) return std::max(0.0, gap);
    const double sd = std::sqrt(variance);
    const double z = gap / sd;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::max(0.0, gap * cdf + sd * pdf);
}

double expected_improvement(const GpPosterior& gp, const Vector& x, double best) {
    const auto p = gp.predict(x);
    return expected_improvement(p.mean, p.variance, best);
}

double log_marginal_likelihood(const GpState& state) { return GpPosterior(state).log_marginal_likelihood(); }

namespace {

double sample_variance(const std::vector<double>& ys) {
    if (ys.size() < 2) return 0.0;
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    return ss / static_cast<double>(ys.size() - 1);
}

double mean_of(const std::vector<double>& ys) {
    return ys.empty() ? 0.0 : std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
}

// Bounded log-space coordinates: value = exp(lo + (hi - lo) * sigmoid(z)).
struct LogBox {
    Vector lo, hi;

    double value(int j, double z) const {
        const double s = 1.0 / (1.0 + std::exp(-z));
        return std::exp(lo(j) + (hi(j) - lo(j)) * s);
    }
    double coordinate(int j, double v) const {
        double s = (std::log(v) - lo(j)) / (hi(j) - lo(j));
        s = std::clamp(s, 1e-6, 1.0 - 1e-6);
        return std::log(s / (1.0 - s));
    }
};

struct FitProblem {
    const std::vector<Vector>* xs;
    const std::vector<double>* ys;
    double mean_const;
    LogBox box;
    int dim;

    GpState state_at(const double* z) const {
        GpState s;
        s.xs = *xs;
        s.ys = *ys;
        s.mean_const = mean_const;
        s.amplitude = box.value(0, z[0]);
        s.length_scales.resize(dim);
        for (int j = 0; j < dim; ++j) s.length_scales(j) = box.value(1 + j, z[1 + j]);
        s.noise_var = box.value(dim + 1, z[dim + 1]);
        return s;
    }
};

constexpr double kBadValue = 1e300;

double negative_lml(const gsl_vector* z, void* params) {
    const auto* p = static_cast<const FitProblem*>(params);
    try {
        const double v = -log_marginal_likelihood(p->state_at(z->data));
        return std::isfinite(v) ? v : kBadValue;
    } catch (const Error&) {
        return kBadValue;
    }
}

std::vector<std::size_t> canonical_order(const std::vector<Vector>& xs, const std::vector<double>& ys) {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& xa = xs[a];
        const auto& xb = xs[b];
        for (Eigen::Index j = 0; j < xa.size(); ++j)
            if (xa(j) != xb(j)) return xa(j) < xb(j);
        return ys[a] < ys[b];
    });
    return idx;
}

}  // namespace

HyperFit heuristic_hyperparameters(const std::vector<Vector>& xs, const std::vector<double>& ys) {
    if (xs.empty()) throw InvalidArgument("heuristic hyperparameters need evidence");
    const auto D = xs.front().size();
    HyperFit fit;
    fit.length_scales = Vector::Ones(D);
    for (Eigen::Index j = 0; j < D; ++j) {
        std::vector<double> dist;
        for (std::size_t a = 0; a < xs.size(); ++a)
            for (std::size_t b = 0; b < a; ++b) dist.push_back(std::abs(xs[a](j) - xs[b](j)));
        if (dist.empty()) continue;
        std::nth_element(dist.begin(), dist.begin() + static_cast<long>(dist.size() / 2), dist.end());
        const double med = dist[dist.size() / 2];
        if (med > 0.0) fit.length_scales(j) = med;
    }
    fit.amplitude = std::max(sample_variance(ys), 1e-12);
    fit.noise_var = 0.1 * fit.amplitude;
    fit.mean_const = mean_of(ys);
    fit.fallback = true;
    return fit;
}

HyperFit fit_hyperparameters(const std::vector<Vector>& xs_in, const std::vector<double>& ys_in,
                             const HyperBounds& bounds, std::uint64_t seed, int n_starts) {
    if (xs_in.size() != ys_in.size()) throw DimensionError("fit_hyperparameters: x and y counts differ");
    if (xs_in.size() < 4) throw InvalidArgument("fit_hyperparameters needs at least 4 evidence points");
    if (n_starts < 1) throw InvalidArgument("fit_hyperparameters needs at least one start");
    gsl_set_error_handler_off();

    std::vector<Vector> xs;
    std::vector<double> ys;
    for (std::size_t i : canonical_order(xs_in, ys_in)) {
        xs.push_back(xs_in[i]);
        ys.push_back(ys_in[i]);
    }
    const int D = static_cast<int>(xs.front().size());
    const double scale = std::max(sample_variance(ys), 1e-12);

    FitProblem problem{&xs, &ys, mean_of(ys), {}, D};
    const int P = D + 2;
    problem.box.lo.resize(P);
    problem.box.hi.resize(P);
    problem.box.lo(0) = std::log(bounds.amplitude_lo * scale);
    problem.box.hi(0) = std::log(bounds.amplitude_hi * scale);
    for (int j = 0; j < D; ++j) {
        problem.box.lo(1 + j) = std::log(bounds.length_lo);
        problem.box.hi(1 + j) = std::log(bounds.length_hi);
    }
    problem.box.lo(P - 1) = std::log(bounds.noise_lo * scale);
    problem.box.hi(P - 1) = std::log(bounds.noise_hi * scale);

    const HyperFit heuristic = heuristic_hyperparameters(xs, ys);
    StreamRng rng(seed, stream_id(StreamTag::bayes_opt, 0x6f70));

    gsl_multimin_function fn{&negative_lml, static_cast<std::size_t>(P), &problem};
    gsl_vector* z = gsl_vector_alloc(static_cast<std::size_t>(P));
    gsl_vector* step = gsl_vector_alloc(static_cast<std::size_t>(P));
    gsl_vector_set_all(step, 1.0);
    gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2,
                                                                    static_cast<std::size_t>(P));

    double best_value = kBadValue;
    Vector best_z(P);
    for (int start = 0; start < n_starts; ++start) {
        if (start == 0) {
            gsl_vector_set(z, 0, problem.box.coordinate(0, heuristic.amplitude));
            for (int j = 0; j < D; ++j)
                gsl_vector_set(z, static_cast<std::size_t>(1 + j),
                               problem.box.coordinate(1 + j, heuristic.length_scales(j)));
            gsl_vector_set(z, static_cast<std::size_t>(P - 1), problem.box.coordinate(P - 1, heuristic.noise_var));
        } else {
            for (int j = 0; j < P; ++j) {
                const double s = 0.05 + 0.9 * rng.uniform();
                gsl_vector_set(z, static_cast<std::size_t>(j), std::log(s / (1.0 - s)));
            }
        }
        gsl_multimin_fminimizer_set(solver, &fn, z, step);
        for (int it = 0; it < 200 * P; ++it) {
            if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-6) == GSL_SUCCESS) break;
        }
        const double v = gsl_multimin_fminimizer_minimum(solver);
        if (v < best_value) {
            best_value = v;
            for (int j = 0; j < P; ++j) best_z(j) = gsl_vector_get(gsl_multimin_fminimizer_x(solver), static_cast<std::size_t>(j));
        }
    }
    gsl_multimin_fminimizer_free(solver);
    gsl_vector_free(step);
    gsl_vector_free(z);

    if (!(best_value < kBadValue)) return heuristic;
    const GpState s = problem.state_at(best_z.data());
    HyperFit fit;
    fit.amplitude = s.amplitude;
    fit.length_scales = s.length_scales;
    fit.noise_var = s.noise_var;
    fit.mean_const = s.mean_const;
    fit.log_marginal_likelihood = -best_value;
    return fit;
}

GpState make_state(std::vector<Vector> xs, std::vector<double> ys, const HyperFit& fit) {
    GpState s;
    s.xs = std::move(xs);
    s.ys = std::move(ys);
    s.amplitude = fit.amplitude;
    s.length_scales = fit.length_scales;
    s.noise_var = fit.noise_var;
    s.mean_const = fit.mean_const;
    return s;
}

}  // namespace bobgmm
