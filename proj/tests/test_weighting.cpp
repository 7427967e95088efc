#include "bobgmm/draws.hpp"
#include "bobgmm/errors.hpp"
#include "bobgmm/weighting.hpp"

#include <doctest.h>

#include <cmath>

using namespace bobgmm;

namespace {

Vector bob_x(int K, double alpha, double rest) {
    Vector x = Vector::Constant(bob_dimension(K), rest);
    x(0) = alpha;
    return x;
}

}  // namespace

TEST_CASE("BOB x = (1, 0, ..., 0) is WLB bit for bit") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        StreamRng a(5, s), b(5, s);
        const WeightDraw wb = draw_weights(WeightScheme::bob(bob_x(3, 1.0, 0.0)), 17, 3, a);
        const WeightDraw wl = draw_weights(WeightScheme::of(WeightVariant::wlb), 17, 3, b);
        CHECK(wb.likelihood_weights == wl.likelihood_weights);
        CHECK(wb.prior_weight_pi == 0.0);
        CHECK(wl.prior_weight_pi == 0.0);
        CHECK(wb.prior_weights_mu == wl.prior_weights_mu);
        CHECK(wb.prior_weights_sigma == wl.prior_weights_sigma);
    }
}

TEST_CASE("BOB x = (1, ..., 1) is fixed-prior WBB with Dirichlet likelihood weights") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        StreamRng a(6, s), b(6, s);
        const WeightDraw wb = draw_weights(WeightScheme::bob(bob_x(2, 1.0, 1.0)), 11, 2, a);
        const WeightDraw ww = draw_weights(WeightScheme::of(WeightVariant::wbb2, true), 11, 2, b);
        CHECK(wb.likelihood_weights == ww.likelihood_weights);
        CHECK(wb.prior_weight_pi == 1.0);
        CHECK(ww.prior_weight_pi == 1.0);
        CHECK(wb.prior_weights_mu == ww.prior_weights_mu);
        CHECK(wb.prior_weights_sigma == ww.prior_weights_sigma);
    }
}

TEST_CASE("BOB weights lie on the simplex and carry x as prior weights") {
    Vector x(6);
    x << 1.7, 0.2, 0.4, 0.6, 0.8, 1.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        StreamRng rng(7, s);
        const WeightDraw w = draw_weights(WeightScheme::bob(x), 30, 2, rng);
        CHECK(std::abs(w.likelihood_weights.sum() - 1.0) < 1e-12);
        CHECK(w.likelihood_weights.minCoeff() >= 0.0);
        CHECK(w.prior_weights_mu == x.segment(1, 2));
        CHECK(w.prior_weights_sigma == x.segment(3, 2));
        CHECK(w.prior_weight_pi == 1.0);
    }
}

TEST_CASE("invalid BOB parameters are rejected") {
    StreamRng rng(1, 1);
    CHECK_THROWS_AS(draw_weights(WeightScheme::bob(bob_x(2, 0.9, 1.0)), 5, 2, rng), InvalidArgument);
    Vector neg = bob_x(2, 1.0, 1.0);
    neg(3) = -0.1;
    CHECK_THROWS_AS(draw_weights(WeightScheme::bob(neg), 5, 2, rng), InvalidArgument);
    CHECK_THROWS_AS(draw_weights(WeightScheme::bob(Vector::Ones(3)), 5, 2, rng), DimensionError);
    CHECK_THROWS_AS(draw_weights(WeightScheme::of(WeightVariant::wbb1), 0, 2, rng), InvalidArgument);
}

TEST_CASE("WBB likelihood weights have mean one") {
    for (auto v : {WeightVariant::wbb1, WeightVariant::wbb2}) {
        const int draws = 100000;
        double sum = 0.0, sum_sq = 0.0;
        for (int s = 0; s < draws; ++s) {
            StreamRng rng(8, static_cast<std::uint64_t>(s));
            const double u = draw_weights(WeightScheme::of(v), 1, 2, rng).likelihood_weights(0);
            sum += u;
            sum_sq += u * u;
        }
        const double mean = sum / draws;
        const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
        CHECK(std::abs(mean - 1.0) < 3 * se);
    }
}

TEST_CASE("WBB2 prior weights are exactly one; WBB1 prior weights average one") {
    const int draws = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < draws; ++s) {
        StreamRng a(9, static_cast<std::uint64_t>(s)), b(9, static_cast<std::uint64_t>(s));
        const WeightDraw w2 = draw_weights(WeightScheme::of(WeightVariant::wbb2), 4, 2, a);
        REQUIRE(w2.prior_weight_pi == 1.0);
        REQUIRE((w2.prior_weights_mu.array() == 1.0).all());
        REQUIRE((w2.prior_weights_sigma.array() == 1.0).all());
        const double v = draw_weights(WeightScheme::of(WeightVariant::wbb1), 4, 2, b).prior_weight_pi;
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
    CHECK(std::abs(mean - 1.0) < 3 * se);
}

TEST_CASE("draws are reproducible per stream") {
    Vector x = bob_x(2, 1.3, 0.5);
    StreamRng a = draw_stream(42, StreamTag::weights, 0, 17);
    StreamRng b = draw_stream(42, StreamTag::weights, 0, 17);
    StreamRng c = draw_stream(42, StreamTag::weights, 0, 18);
    const auto wa = draw_weights(WeightScheme::bob(x), 25, 2, a);
    const auto wb = draw_weights(WeightScheme::bob(x), 25, 2, b);
    const auto wc = draw_weights(WeightScheme::bob(x), 25, 2, c);
    CHECK(wa.likelihood_weights == wb.likelihood_weights);
    CHECK(wa.likelihood_weights != wc.likelihood_weights);
}

TEST_CASE("overdispersion: Dirichlet variance at x_alpha = 1") {
    StreamRng rng(10, 0);
    const auto s = dirichlet_overdispersion_check(1.0, 10, 20000, rng);
    CHECK(std::abs(s.variance - 9.0 / 1100.0) < 3 * s.std_error);
}

TEST_CASE("overdispersion grows with x_alpha") {
    StreamRng r1(11, 0), r2(11, 1), r3(11, 2);
    const auto a = dirichlet_overdispersion_check(1.0, 20, 5000, r1);
    const auto b = dirichlet_overdispersion_check(1.5, 20, 5000, r2);
    const auto c = dirichlet_overdispersion_check(2.0, 20, 5000, r3);
    CHECK(b.variance > a.variance);
    CHECK(c.variance > b.variance);
    CHECK(c.coefficient_of_variation > a.coefficient_of_variation);
}

TEST_CASE("overdispersion with n = 1 is degenerate") {
    StreamRng rng(12, 0);
    const auto s = dirichlet_overdispersion_check(2.0, 1, 100, rng);
    CHECK(s.variance == 0.0);
    StreamRng r2(12, 1);
    CHECK(power_dirichlet_weights(3.0, 1, r2)(0) == 1.0);
}

TEST_CASE("scheme names round trip") {
    for (auto v : {WeightVariant::wlb, WeightVariant::wbb1, WeightVariant::wbb2, WeightVariant::bob})
        CHECK(parse_weight_variant(to_string(v)) == v);
    CHECK_THROWS(parse_weight_variant("nuts"));
}

TEST_CASE("likelihood scale n multiplies normalized weights only") {
    const int n = 40, K = 3;
    Vector x(bob_dimension(K));
    x << 1.3, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 0.5;
    for (int s = 0; s < 20; ++s) {
        for (WeightScheme scheme : {WeightScheme::bob(x), WeightScheme::of(WeightVariant::wlb),
                                    WeightScheme::of(WeightVariant::wbb2, true)}) {
            StreamRng a(5, s), b(5, s);
            const WeightDraw unit = draw_weights(scheme, n, K, a);
            scheme.likelihood_scale = LikelihoodScale::n;
            const WeightDraw big = draw_weights(scheme, n, K, b);
            CHECK(std::abs(big.likelihood_weights.sum() - n) < 1e-10);
            CHECK(big.likelihood_weights == unit.likelihood_weights * static_cast<double>(n));
            CHECK(big.prior_weights_mu == unit.prior_weights_mu);
            CHECK(big.prior_weights_sigma == unit.prior_weights_sigma);
            CHECK(big.prior_weight_pi == unit.prior_weight_pi);
        }
        WeightScheme w1 = WeightScheme::of(WeightVariant::wbb1);
        StreamRng a(6, s), b(6, s);
        const WeightDraw plain = draw_weights(w1, n, K, a);
        w1.likelihood_scale = LikelihoodScale::n;
        CHECK(draw_weights(w1, n, K, b).likelihood_weights == plain.likelihood_weights);
    }
    CHECK(parse_likelihood_scale("n") == LikelihoodScale::n);
    CHECK(to_string(LikelihoodScale::unit) == "unit");
    CHECK_THROWS_AS(parse_likelihood_scale("half"), InvalidArgument);
}
