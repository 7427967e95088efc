#include "bobgmm/bayes_opt.hpp"
#include "bobgmm/errors.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <chrono>
#include <numbers>

using namespace bobgmm;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

double phi0() { return 1.0 / std::sqrt(2 * std::numbers::pi); }

}  // namespace

TEST_CASE("matern25: zero distance, unit distance and length-scale scaling") {
    const Vector ls = v2(0.7, 1.9);
    CHECK(matern25(v2(0.3, 0.1), v2(0.3, 0.1), 2.5, ls) == 2.5);
    CHECK(matern25(v1(0.0), v1(1.0), 1.0, v1(1.0)) ==
          doctest::Approx((1 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0))).epsilon(1e-14));
    CHECK(matern25(v1(0.0), v1(1.0), 1.0, v1(1.0)) == doctest::Approx(0.52399).epsilon(1e-5));
    const Vector x = v2(0.2, -0.4), y = v2(1.1, 0.5);
    CHECK(matern25(x, y, 1.3, 2 * ls) == doctest::Approx(matern25(x / 2, y / 2, 1.3, ls)).epsilon(1e-14));
    CHECK(matern25(x, y, 1.3, ls) == matern25(y, x, 1.3, ls));
}

TEST_CASE("Gram matrices on random points are PSD") {
    StreamRng rng(1, 0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Vector> xs;
        for (int i = 0; i < 50; ++i) xs.push_back(Vector::NullaryExpr(4, [&] { return rng.uniform(); }));
        const Matrix G = gram_matrix(xs, 1.0, Vector::Constant(4, 0.1 + rng.uniform()));
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("gp_posterior: empty evidence returns the prior") {
    GpState s;
    s.amplitude = 1.7;
    s.length_scales = v1(0.3);
    s.mean_const = -2.0;
    const auto p = gp_posterior(s, v1(0.5));
    CHECK(p.mean == -2.0);
    CHECK(p.variance == 1.7);
}

TEST_CASE("gp_posterior: noiseless interpolation") {
    GpState s;
    s.xs = {v1(0.4)};
    s.ys = {3.0};
    s.length_scales = v1(0.2);
    const auto p = gp_posterior(s, v1(0.4));
    CHECK(std::abs(p.mean - 3.0) < 1e-8);
    CHECK(p.variance < 1e-8);
}

TEST_CASE("gp_posterior matches an explicit 2x2 inverse") {
    GpState s;
    s.xs = {v1(0.1), v1(0.6)};
    s.ys = {1.0, -0.5};
    s.amplitude = 2.0;
    s.length_scales = v1(0.4);
    s.noise_var = 0.05;
    s.mean_const = 0.2;
    const Vector q = v1(0.35);
    const double k11 = 2.0 + 0.05, k22 = 2.0 + 0.05, k12 = matern25(s.xs[0], s.xs[1], 2.0, s.length_scales);
    const double det = k11 * k22 - k12 * k12;
    const double i11 = k22 / det, i22 = k11 / det, i12 = -k12 / det;
    const double a = matern25(q, s.xs[0], 2.0, s.length_scales), b = matern25(q, s.xs[1], 2.0, s.length_scales);
    const double r1 = 1.0 - 0.2, r2 = -0.5 - 0.2;
    const double mean = 0.2 + a * (i11 * r1 + i12 * r2) + b * (i12 * r1 + i22 * r2);
    const double var = 2.0 - (a * (i11 * a + i12 * b) + b * (i12 * a + i22 * b));
    const auto p = gp_posterior(s, q);
    CHECK(std::abs(p.mean - mean) < 1e-10);
    CHECK(std::abs(p.variance - var) < 1e-10);
}

TEST_CASE("posterior variance at evidence is at most the noise") {
    StreamRng rng(2, 0);
    GpState s;
    for (int i = 0; i < 15; ++i) {
        s.xs.push_back(v2(rng.uniform(), rng.uniform()));
        s.ys.push_back(sample_standard_normal(rng));
    }
    s.length_scales = v2(0.3, 0.5);
    s.noise_var = 0.01;
    const GpPosterior gp(s);
    for (const auto& x : s.xs) CHECK(gp.predict(x).variance <= s.noise_var + 1e-6);
}

TEST_CASE("expected_improvement closed form") {
    CHECK(expected_improvement(1.0, 0.0, 1.0) == 0.0);
    CHECK(expected_improvement(1.5, 0.0, 1.0) == 0.5);
    CHECK(expected_improvement(0.0, 1.0, 0.0) == doctest::Approx(phi0()).epsilon(1e-14));
    CHECK(expected_improvement(0.0, 1.0, 0.0) == doctest::Approx(0.3989423).epsilon(1e-7));
    double prev = 0.0;
    for (double sd = 0.0; sd < 5.0; sd += 0.05) {
        const double ei = expected_improvement(-0.3, sd * sd, 0.0);
        CHECK(ei >= prev);
        prev = ei;
    }
    for (double m = -5; m < 5; m += 0.37) CHECK(expected_improvement(m, 0.3, 0.1) >= 0.0);
}

TEST_CASE("EI vanishes at the best noiseless evidence point") {
    GpState s;
    s.xs = {v1(0.1), v1(0.5), v1(0.9)};
    s.ys = {0.2, 1.0, 0.4};
    s.length_scales = v1(0.3);
    const GpPosterior gp(s);
    CHECK(expected_improvement(gp, v1(0.5), 1.0) <= 1e-8);
    CHECK(incumbent_value(gp, IncumbentRule::raw_best) == 1.0);
    CHECK(incumbent_value(gp, IncumbentRule::posterior_mean) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fit_hyperparameters: constant data collapses to the lower bounds") {
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (int i = 0; i < 8; ++i) {
        xs.push_back(v1(i / 7.0));
        ys.push_back(4.0);
    }
    const HyperBounds b;
    const HyperFit f = fit_hyperparameters(xs, ys, b, 1);
    CHECK(f.amplitude <= 1e-12 * b.amplitude_lo * 1.01 + 1e-30);
    CHECK(f.noise_var <= 1e-12 * b.noise_lo * 1.01 + 1e-30);
    const GpPosterior gp(make_state(xs, ys, f));
    for (double x = 0; x <= 1; x += 0.05) CHECK(gp.predict(v1(x)).mean == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("fit_hyperparameters: noiseless line interpolates") {
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (int i = 0; i < 10; ++i) {
        const double x = (i * 0.37 - std::floor(i * 0.37));
        xs.push_back(v1(x));
        ys.push_back(2.0 * x - 1.0);
    }
    const HyperBounds b;
    const HyperFit f = fit_hyperparameters(xs, ys, b, 3);
    double var = 0.0, mean = 0.0;
    for (double y : ys) mean += y / ys.size();
    for (double y : ys) var += (y - mean) * (y - mean) / (ys.size() - 1);
    CHECK(f.noise_var <= b.noise_lo * var * 1.05);
    const GpPosterior gp(make_state(xs, ys, f));
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(gp.predict(xs[i]).mean - ys[i]) < 1e-4);
}

TEST_CASE("fit_hyperparameters is order independent and seeded") {
    StreamRng rng(4, 0);
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (int i = 0; i < 12; ++i) {
        xs.push_back(v2(rng.uniform(), rng.uniform()));
        ys.push_back(std::sin(5 * xs.back()(0)) + xs.back()(1) + 0.05 * sample_standard_normal(rng));
    }
    const HyperFit a = fit_hyperparameters(xs, ys, {}, 9);
    std::reverse(xs.begin(), xs.end());
    std::reverse(ys.begin(), ys.end());
    const HyperFit b = fit_hyperparameters(xs, ys, {}, 9);
    CHECK(a.amplitude == b.amplitude);
    CHECK(a.noise_var == b.noise_var);
    CHECK(a.length_scales == b.length_scales);
    CHECK(a.mean_const == doctest::Approx(b.mean_const).epsilon(1e-15));
    CHECK_THROWS(fit_hyperparameters({v1(0), v1(1)}, {0.0, 1.0}, {}, 1));
}

TEST_CASE("propose_next: single evidence point is not re-proposed") {
    GpState s;
    s.xs = {v1(0.3)};
    s.ys = {1.0};
    s.length_scales = v1(0.2);
    const SearchBox box{v1(0.0), v1(1.0)};
    const Vector x = propose_next(s, box, {}, 5);
    CHECK(std::abs(x(0) - 0.3) > 1e-6);
    CHECK(box.contains(x));
}

TEST_CASE("propose_next matches a dense-grid EI argmax") {
    GpState s;
    auto f = [](double x) { return -std::pow(x - 0.62, 2) + 0.1 * std::sin(12 * x); };
    for (double x : {0.1, 0.45, 0.85}) {
        s.xs.push_back(v1(x));
        s.ys.push_back(f(x));
    }
    s.length_scales = v1(0.25);
    s.amplitude = 0.1;
    s.mean_const = (s.ys[0] + s.ys[1] + s.ys[2]) / 3;
    const GpPosterior gp(s);
    const double best = incumbent_value(gp, IncumbentRule::posterior_mean);
    const int N = 100000;
    double arg = 0.0, top = -1.0;
    for (int i = 0; i <= N; ++i) {
        const double x = static_cast<double>(i) / N;
        const double ei = expected_improvement(gp, v1(x), best);
        if (ei > top) {
            top = ei;
            arg = x;
        }
    }
    const Vector x = propose_next(s, SearchBox{v1(0.0), v1(1.0)}, {}, 1);
    CHECK(std::abs(x(0) - arg) <= 1.0 / N);
}

TEST_CASE("propose_next stays in the box and handles fixed coordinates") {
    StreamRng rng(6, 0);
    const SearchBox box{v2(1.0, 0.5), v2(1.5, 0.5)};
    GpState s;
    for (int i = 0; i < 5; ++i) {
        s.xs.push_back(v2(1.0 + 0.5 * rng.uniform(), 0.5));
        s.ys.push_back(rng.uniform());
    }
    s.length_scales = v2(0.2, 1.0);
    s.noise_var = 1e-4;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Vector x = propose_next(s, box, {}, seed);
        CHECK(box.contains(x));
        CHECK(x(1) == 0.5);
    }
}

TEST_CASE("latin hypercube puts one point per stratum") {
    StreamRng rng(7, 0);
    const Matrix U = latin_hypercube(10, 3, rng);
    for (int j = 0; j < 3; ++j) {
        std::vector<int> hit(10, 0);
        for (int i = 0; i < 10; ++i) hit[static_cast<int>(U(i, j) * 10)]++;
        for (int c : hit) CHECK(c == 1);
    }
}

TEST_CASE("maximize: quadratic bowl") {
    const SearchBox box{v2(0, 0), v2(1, 1)};
    const auto t0 = std::chrono::steady_clock::now();
    const BoResult r = maximize([](const Vector& x) { return std::optional<double>(-(x.array() - 0.5).square().sum()); },
                                box, {10, 25}, 11);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(std::abs(r.best_x(0) - 0.5) < 0.15);
    CHECK(std::abs(r.best_x(1) - 0.5) < 0.15);
    CHECK(r.trace.size() == 35);
    CHECK(secs < 10.0);
}

TEST_CASE("maximize: initial design only, failures and bookkeeping") {
    const SearchBox box{v1(-2.0), v1(3.0)};
    int calls = 0;
    const BlackBox f = [&](const Vector& x) -> std::optional<double> {
        ++calls;
        if (x(0) > 2.0) return std::nullopt;
        return -std::abs(x(0) - 1.0);
    };
    const BoResult a = maximize(f, box, {6, 0}, 2);
    double best = -1e300;
    for (const auto& t : a.trace) best = std::max(best, t.value);
    CHECK(a.best_value == best);
    CHECK(a.trace.size() + a.failed.size() == 6);

    const BoResult b = maximize(f, box, {5, 10}, 3);
    CHECK(b.trace.size() == 15 - b.failed.size());
    CHECK(box.contains(b.best_x));
    for (const auto& t : b.trace) CHECK(box.contains(t.x));
    CHECK_THROWS(maximize(f, box, {1, 3}, 1));
}

TEST_CASE("maximize is reproducible for a fixed seed") {
    const SearchBox box{v2(0, 0), v2(1, 2)};
    const BlackBox f = [](const Vector& x) { return std::optional<double>(std::sin(3 * x(0)) * std::cos(x(1))); };
    const BoResult a = maximize(f, box, {5, 5}, 42);
    const BoResult b = maximize(f, box, {5, 5}, 42);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].x == b.trace[i].x);
}
