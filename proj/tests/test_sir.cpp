#include <doctest.h>

#include "hypedyn/error.hpp"
#include "hypedyn/sir.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace hypedyn::sir;
using hypedyn::InvalidArgument;
using hypedyn::NumericalError;

namespace {

SirParams make(double c, double r, double n) {
    SirParams p;
    p.contagion_rate = c;
    p.recovery_rate = r;
    p.population = n;
    return p;
}

// Forward Euler at a tiny step; first order but trivially correct.
SirState euler(const SirParams& p, SirState x, double horizon, double h) {
    const auto steps = static_cast<long>(std::llround(horizon / h));
    for (long i = 0; i < steps; ++i) {
        double inf = p.contagion_rate * x.active * x.susceptible;
        double rec = p.recovery_rate * x.active;
        x = {x.susceptible - h * inf, x.active + h * (inf - rec), x.recovered + h * rec};
    }
    return x;
}

}  // namespace

TEST_CASE("integrator against a fine Euler oracle") {
    auto p = make(0.0004, 0.5, 5000);
    SirState init{4990, 10, 0};
    auto series = integrate(p, init, 0.01, 20.0);
    REQUIRE(series.size() == 2001);
    CHECK(series.back().t == 20.0);
    auto ref = euler(p, init, 20.0, 1e-5);
    CHECK(std::abs(series.back().state.susceptible - ref.susceptible) < 0.05);
    CHECK(std::abs(series.back().state.active - ref.active) < 0.05);
    CHECK(std::abs(series.back().state.recovered - ref.recovered) < 0.05);
}

TEST_CASE("conservation, non-negativity and monotonicity") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 20; ++k) {
        double n = 1000 + 9000 * u(rng);
        double a0 = n * (0.001 + 0.05 * u(rng));
        auto p = make((0.2 + 3 * u(rng)) / n, 0.1 + u(rng), n);
        auto series = integrate(p, {n - a0, a0, 0}, 0.01, 60.0);
        for (std::size_t i = 0; i < series.size(); ++i) {
            const auto& s = series[i].state;
            CHECK(std::abs(s.total() - n) <= 1e-9 * n);
            CHECK(s.susceptible >= 0);
            CHECK(s.active >= 0);
            CHECK(s.recovered >= 0);
            if (i > 0) {
                CHECK(s.susceptible <= series[i - 1].state.susceptible);
                CHECK(s.recovered >= series[i - 1].state.recovered);
            }
        }
    }
}

TEST_CASE("RK4 order") {
    auto p = make(0.001, 0.6, 2000);
    SirState init{1980, 20, 0};
    double horizon = 10.0;
    // oracle: the same problem with a 1/400 step, far below the tested ones
    auto fine = integrate(p, init, 0.2 / 400, horizon).back().state.active;
    double e1 = std::abs(integrate(p, init, 0.2, horizon).back().state.active - fine);
    double e2 = std::abs(integrate(p, init, 0.1, horizon).back().state.active - fine);
    REQUIRE(e2 > 0);
    double ratio = e1 / e2;
    CHECK(ratio >= 8);
    CHECK(ratio <= 32);
}

TEST_CASE("record stride and last step") {
    auto p = make(0.001, 0.5, 1000);
    auto s = integrate(p, {990, 10, 0}, 0.3, 1.0, 2);
    // steps at 0.3, 0.6, 0.9, 1.0: kept 0.6 and the final one
    REQUIRE(s.size() == 3);
    CHECK(s[0].t == 0.0);
    CHECK(s[1].t == doctest::Approx(0.6));
    CHECK(s[2].t == 1.0);
    CHECK_THROWS_AS(integrate(p, {990, 10, 0}, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(integrate(p, {990, 20, 0}, 0.1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(integrate(p, {1000, -1, 1}, 0.1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(integrate(make(0.5, 0.5, 1000), {500, 500, 0}, 5.0, 10.0), NumericalError);
}

TEST_CASE("trivial dynamics") {
    auto flat = integrate(make(0.001, 0.5, 1000), {1000, 0, 0}, 0.1, 5.0);
    for (const auto& s : flat) {
        CHECK(s.state.active == 0.0);
        CHECK(s.state.susceptible == 1000.0);
    }

    // below threshold: active strictly decreasing
    auto sub = integrate(make(0.0001, 0.5, 1000), {990, 10, 0}, 0.05, 20.0);
    for (std::size_t i = 1; i < sub.size(); ++i) CHECK(sub[i].state.active < sub[i - 1].state.active);
}

TEST_CASE("derive rates") {
    auto r = derive_rates(0.5, 1.0, 19.6);
    CHECK(r.recovery_rate == doctest::Approx(0.05102).epsilon(2e-4));
    CHECK(std::abs(r.recovery_rate - 0.05102) < 1e-5);
    CHECK(derive_rates(0.013, 0.068, 1.0).contagion_rate == doctest::Approx(0.000884).epsilon(1e-12));
    CHECK(derive_rates(0.0, 0.068, 1.0).contagion_rate == 0.0);
    CHECK_THROWS_AS(derive_rates(0.1, 0.1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(derive_rates(1.5, 0.1, 1.0), InvalidArgument);
}

TEST_CASE("outbreak threshold") {
    auto b = outbreak_threshold(make(0.5 / 800, 0.5, 1000), 800);
    CHECK(b.r0 == doctest::Approx(1.0));
    CHECK_FALSE(b.outbreak);
    auto t = outbreak_threshold(make(0.000884, 2.39, 9000), 9000);
    CHECK(t.r0 == doctest::Approx(3.33).epsilon(1e-3));
    CHECK(t.outbreak);
    CHECK(outbreak_threshold(make(0.0, 2.39, 9000), 9000).r0 == 0.0);
}

TEST_CASE("final size") {
    double n = 9000, i0 = 9, rinf = 0.99 * n;
    double ratio = contagion_ratio_for_final_size(n, i0, rinf);
    CHECK(ratio == doctest::Approx(std::log(99.9) / 8910).epsilon(1e-12));
    auto fs = final_size(make(ratio, 1.0, n), i0);
    CHECK(std::abs(fs.recovered - rinf) < 1e-6 * n);
    CHECK(fs.super_threshold);

    // huge contagion ratio saturates
    auto sat = final_size(make(1.0, 1e-3, n), i0);
    CHECK(sat.recovered > 0.999999 * n);

    auto sub = final_size(make(0.5 / n, 1.0, n), i0);
    CHECK_FALSE(sub.super_threshold);
    CHECK(sub.recovered < 3 * i0);

    CHECK_THROWS_AS(final_size(make(1e-4, 1, n), 0), InvalidArgument);
    CHECK_THROWS_AS(contagion_ratio_for_final_size(n, 10, 5), InvalidArgument);
}

TEST_CASE("final size matches long integration") {
    // With B0 = 0 and A0 = I0, R_inf = B(inf) solves the relation above.
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 20; ++k) {
        double n = 2000 + 8000 * u(rng);
        double i0 = n * (0.001 + 0.01 * u(rng));
        double r = 0.3 + 0.7 * u(rng);
        double c = r * (1.3 + 3 * u(rng)) / (n - i0);
        auto p = make(c, r, n);
        auto fs = final_size(p, i0);
        REQUIRE(fs.super_threshold);
        auto end = integrate(p, {n - i0, i0, 0}, 0.02, 400.0, 1000).back().state;
        double b_inf = end.recovered + end.active;
        CHECK(std::abs(b_inf - fs.recovered) / fs.recovered < 1e-4);
    }
}

TEST_CASE("forecast interest") {
    auto hump = forecast_interest(make(0.002, 0.5, 1000), 5, 60, 0.01);
    std::size_t peaks = 0;
    for (std::size_t i = 1; i + 1 < hump.size(); ++i) {
        if (hump[i].state.active > hump[i - 1].state.active && hump[i].state.active >= hump[i + 1].state.active) ++peaks;
    }
    CHECK(peaks == 1);
    CHECK(hump.front().state.active == doctest::Approx(0.005));

    auto decay = forecast_interest(make(0.0001, 0.5, 1000), 5, 20, 0.01);
    for (std::size_t i = 1; i < decay.size(); ++i) CHECK(decay[i].state.active < decay[i - 1].state.active);

    auto all = forecast_interest(make(0.002, 0.3, 1000), 1000, 10, 0.01);
    for (const auto& s : all) CHECK(std::abs(s.state.active - std::exp(-0.3 * s.t)) < 1e-6);

    CHECK_THROWS_AS(forecast_interest(make(0.002, 0.3, 1000), 2000, 10, 0.01), InvalidArgument);
}
