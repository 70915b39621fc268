#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "adamlab/optim.hpp"
#include "adamlab/rng.hpp"
#include "adamlab/vi.hpp"

using namespace adamlab;
using doctest::Approx;

TEST_CASE("vi_objective examples") {
    const GaussianBelief prior{0.0, 1.0};
    // lambda = 0 and a candidate mean at g: only the log term is left
    CHECK(vi_objective(prior, {2.0, 3.0}, 2.0, 0.0) == Approx(0.5 * std::log(3.0)));
    // identical Gaussians: the KL term vanishes
    CHECK(vi_objective(prior, prior, 0.5, 4.0) == Approx(0.5 * 0.25));
    for (double g : {-1.0, 0.0, 2.5}) CHECK(vi_objective(prior, {1.0, 1.0}, g, 1.0) == Approx((g - 1) * (g - 1) / 2 + 0.5));
}

TEST_CASE("vi_update example") {
    const auto post = vi_update({0.0, 1.0}, 2.0, 1.0);
    CHECK(post.mean == Approx(1.0));
    CHECK(post.variance == Approx(1.5));
}

TEST_CASE("lambda and beta are inverse parameterizations") {
    CHECK(lambda_beta(1.0) == 0.5);
    CHECK(lambda_beta(0.0) == 0.0);
    CHECK(lambda_beta(19.0) == Approx(0.95));
    CHECK(lambda_beta(std::numeric_limits<double>::infinity()) == 1.0);
    for (double b : {0.1, 0.5, 0.9, 0.999}) CHECK(lambda_beta(beta_lambda(b)) == Approx(b).epsilon(1e-14));
}

TEST_CASE("infinite lambda keeps the prior and g == mean only shrinks the variance") {
    const GaussianBelief prior{0.3, 2.0};
    CHECK(vi_update(prior, 17.0, std::numeric_limits<double>::infinity()) == prior);
    const auto post = vi_update(prior, 0.3, 3.0);
    CHECK(post.mean == Approx(0.3));
    CHECK(post.variance == Approx(0.75 * 2.0));
}

TEST_CASE("closed form agrees with the derivative-free oracle") {
    Rng rng(404);
    for (int trial = 0; trial < 40; ++trial) {
        const GaussianBelief prior{rng.normal() * 2, std::exp(rng.uniform(-3, 3))};
        const double g = rng.normal() * 3;
        const double lambda = std::exp(rng.uniform(-2, 4));
        const auto closed = vi_update(prior, g, lambda);
        const auto oracle = vi_numeric_oracle(prior, g, lambda, 1e-10);
        CHECK(oracle.mean == Approx(closed.mean).epsilon(1e-4).scale(1.0));
        CHECK(oracle.variance == Approx(closed.variance).epsilon(1e-4));
    }
}

TEST_CASE("no random candidate beats the closed form") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const GaussianBelief prior{rng.normal(), std::exp(rng.uniform(-2, 2))};
        const double g = rng.normal() * 2;
        const double lambda = std::exp(rng.uniform(-1, 3));
        const auto best = vi_update(prior, g, lambda);
        const double f_best = vi_objective(prior, best, g, lambda);
        for (int c = 0; c < 2000; ++c) {
            const GaussianBelief cand{best.mean + rng.normal() * std::sqrt(best.variance),
                                      best.variance * std::exp(rng.uniform(-2, 2))};
            CHECK(vi_objective(prior, cand, g, lambda) >= f_best - 1e-8);
        }
    }
}

TEST_CASE("the VI recursion is the equal-beta adam state") {
    Rng rng(5);
    for (double beta : {0.5, 0.9, 0.95}) {
        OptimizerConfig c = OptimizerConfig::adam_equal_beta(beta);
        c.epsilon = 0.0;
        c.bias_correction = false;
        OptimizerState s = init_state(c, 1);
        GaussianBelief b{};
        for (int k = 0; k < 500; ++k) {
            const double g = 0.4 + rng.normal();
            direction(c, s, Vec{g});
            b = vi_update(b, g, beta_lambda(beta));
            CHECK(b.mean == Approx(s.m.value[0]).epsilon(1e-12).scale(1.0));
            CHECK(b.variance == Approx(s.delta[0]).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("variance stays positive along random streams") {
    Rng rng(6);
    GaussianBelief b{0.0, 1.0};
    for (int k = 0; k < 10000; ++k) {
        b = vi_update(b, rng.normal() * 10, std::exp(rng.uniform(-3, 5)));
        REQUIRE(b.variance > 0.0);
        REQUIRE(std::isfinite(b.mean));
    }
}

TEST_CASE("bad inputs") {
    CHECK_THROWS_AS(vi_update({0.0, 1.0}, 1.0, -1.0), PreconditionError);
    CHECK_THROWS_AS(vi_update({0.0, -1.0}, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(vi_update({0.0, 1.0}, NAN, 1.0), NumericError);
}
