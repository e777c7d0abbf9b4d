#include <doctest.h>

#include "hypedyn/dynamics.hpp"
#include "hypedyn/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace hypedyn;

namespace {

ModelParams make(double alpha, double beta, double lambda, double capacity, double gamma = 0.0) {
    ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.lambda = lambda;
    p.capacity = capacity;
    p.gamma = gamma;
    return p;
}

// Plain bisection for the positive root of tanh(a x) = x on (0, 1].
double tanh_root(double a) {
    double lo = 1e-9, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (std::tanh(a * mid) - mid > 0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("aggregate sentiment examples") {
    CHECK(aggregate_sentiment(make(1.5, 1, 1, 0), {0, 0}) == 0.0);

    double root = tanh_root(1.5);
    CHECK(aggregate_sentiment(make(1.5, 1, 1, 0), {root, 0}) == doctest::Approx(root).epsilon(1e-10));

    CHECK(aggregate_sentiment(make(0, 1, 1, 0), {0.5, 0.1}) == doctest::Approx(std::tanh(0.1)).epsilon(1e-14));
    CHECK(aggregate_sentiment(make(0, 1, 1, 0), {0.5, 0.1}) == doctest::Approx(0.09967).epsilon(1e-4));

    // lambda divides the whole argument
    CHECK(aggregate_sentiment(make(2, 4, 2, 0), {0.3, 0.2}) ==
          doctest::Approx(std::tanh((4 * 0.2 + 2 * 0.3) / 2)));
}

TEST_CASE("aggregate sentiment rejects non-finite input") {
    CHECK_THROWS_AS(aggregate_sentiment(make(1, 1, 1, 0), {NAN, 0}), InvalidArgument);
    CHECK_THROWS_AS(aggregate_sentiment(make(1, 1, 1, 0), {0, INFINITY}), InvalidArgument);
    CHECK_THROWS_AS(aggregate_sentiment(make(1, 1, 0, 0), {0, 0}), InvalidArgument);
    CHECK_THROWS_AS(aggregate_sentiment(make(-1, 1, 1, 0), {0, 0}), InvalidArgument);
}

TEST_CASE("step examples") {
    auto p = make(0.7, 1, 1, 2);
    CHECK(step(p, {0, 0}) == MarketState{0, 0});

    auto s = step(p, {0, 0.5});
    CHECK(s.phi == doctest::Approx(std::tanh(0.5)).epsilon(1e-14));
    CHECK(s.ret == doctest::Approx(2 * std::tanh(0.5)).epsilon(1e-14));
    CHECK(s.phi == doctest::Approx(0.46212).epsilon(1e-5));
    CHECK(s.ret == doctest::Approx(0.92424).epsilon(1e-5));

    auto z = step(make(0.9, 1.3, 1, 0), {0.4, -0.2});
    CHECK(z.ret == 0.0);

    // noise enters r only
    auto a = step(p, {0.1, 0.2}, 0.0);
    auto b = step(p, {0.1, 0.2}, 0.05);
    CHECK(a.phi == b.phi);
    CHECK(b.ret - a.ret == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("bullish probability") {
    auto p = make(0, 1, 1, 0);
    CHECK(bullish_probability(p, {0, 0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bullish_probability(p, {0, std::log(3.0) / 2}) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("simulate") {
    auto p = make(0.7, 1, 1, 0.3);
    auto one = simulate(p, {0, 0.5}, 0, 1e-3, 7);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == MarketState{0, 0.5});

    auto path = simulate(p, {0, 0.5}, 2000, 0.0, 1);
    REQUIRE(path.size() == 2001);
    CHECK(std::abs(path.back().ret) < 1e-6);

    // noise-free path equals repeated step
    MarketState x{0, 0.5};
    for (std::size_t t = 1; t <= 50; ++t) {
        x = step(p, x);
        CHECK(path[t] == x);
    }

    auto n1 = simulate(make(1.1, 1, 1, 1.4), {0.2, 0.1}, 500, 1e-3, 42);
    auto n2 = simulate(make(1.1, 1, 1, 1.4), {0.2, 0.1}, 500, 1e-3, 42);
    CHECK(n1 == n2);
    auto n3 = simulate(make(1.1, 1, 1, 1.4), {0.2, 0.1}, 500, 1e-3, 43);
    CHECK(n1 != n3);

    CHECK_THROWS_AS(simulate(p, {NAN, 0}, 5, 0, 0), InvalidArgument);
    CHECK_THROWS_AS(simulate(p, {1.5, 0}, 5, 0, 0), InvalidArgument);
    CHECK_THROWS_AS(simulate(p, {0, 0}, 5, -1, 0), InvalidArgument);
}

TEST_CASE("simulate_agents against the tanh map") {
    CHECK(std::abs(simulate_agents(make(1, 1, 1, 0), {0, 0}, 1000000, 3)) < 0.005);

    auto p = make(1, 1, 1, 0);
    double mc = simulate_agents(p, {0.3, 0.2}, 1000000, 11);
    CHECK(std::abs(mc - std::tanh(0.5)) < 0.005);
    CHECK(std::tanh(0.5) == doctest::Approx(0.4621).epsilon(1e-4));

    // convergence bound 5 / sqrt(n)
    auto q = make(0.8, 1.2, 0.7, 0);
    MarketState s{-0.4, 0.25};
    double target = aggregate_sentiment(q, s);
    for (std::size_t n : {10000u, 100000u, 1000000u}) {
        double est = simulate_agents(q, s, n, 1234 + n);
        CHECK(std::abs(est - target) <= 5.0 / std::sqrt(double(n)));
    }

    CHECK_THROWS_AS(simulate_agents(p, {0, 0}, 0, 1), InvalidArgument);
}

TEST_CASE("gamma cancels") {
    MarketState s{0.35, -0.15};
    double ref = aggregate_sentiment(make(1.2, 0.8, 1, 0, 0), s);
    double ref_mc = simulate_agents(make(1.2, 0.8, 1, 0, 0), s, 100000, 5);
    for (double g : {1.0, 10.0}) {
        CHECK(aggregate_sentiment(make(1.2, 0.8, 1, 0, g), s) == ref);
        CHECK(simulate_agents(make(1.2, 0.8, 1, 0, g), s, 100000, 5) == ref_mc);
    }
}

TEST_CASE("price return") {
    CapacityInputs unit{1, 1, 1, 1};
    CHECK(price_return(unit, 0.0) == 0.0);
    CHECK(price_return(unit, 0.1) == doctest::Approx(0.1));

    // $18B of purchasing power against a $1.5B market cap
    CapacityInputs big{10000, 1.8e6, 1.5e9, 1.0};
    CHECK(price_return(big, 1.0) == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(big.capacity() == doctest::Approx(12.0).epsilon(1e-12));

    CHECK_THROWS_AS(price_return(CapacityInputs{1, 1, 0, 1}, 0.1), InvalidArgument);
    CHECK_THROWS_AS(price_return(CapacityInputs{1, 1, 1, -2}, 0.1), InvalidArgument);
}

TEST_CASE("gumbel fit") {
    std::mt19937_64 rng(99);
    std::extreme_value_distribution<double> g(-1.30, 2.21);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = g(rng);
    auto fit = fit_gumbel(xs);
    CHECK(std::abs(fit.location / -1.30 - 1) < 0.02);
    CHECK(std::abs(fit.scale / 2.21 - 1) < 0.02);

    std::vector<double> shifted = xs;
    for (auto& x : shifted) x += 3.75;
    auto moved = fit_gumbel(shifted);
    CHECK(moved.location - fit.location == doctest::Approx(3.75).epsilon(1e-12));
    CHECK(std::abs(moved.scale - fit.scale) < 1e-12);

    std::vector<double> flat(50, 2.0);
    CHECK_THROWS_AS(fit_gumbel(flat), InvalidArgument);
    std::vector<double> few{1, 2, 3};
    CHECK_THROWS_AS(fit_gumbel(few), InvalidArgument);
}

TEST_CASE("property: range, odd symmetry, probability consistency") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0, 1), upm(-1, 1);
    for (int i = 0; i < 2000; ++i) {
        // |argument| stays below 12 so tanh is strictly inside (-1, 1) in doubles
        auto p = make(3 * u01(rng), 3 * u01(rng), 0.5 + 2 * u01(rng), 2 * u01(rng), 5 * u01(rng));
        MarketState s{upm(rng), upm(rng)};
        double f = aggregate_sentiment(p, s);
        CHECK(f > -1.0);
        CHECK(f < 1.0);
        CHECK(aggregate_sentiment(p, {-s.phi, -s.ret}) == doctest::Approx(-f).epsilon(1e-12));
        CHECK(std::abs(2 * bullish_probability(p, s) - 1 - f) < 1e-12);
    }
}
