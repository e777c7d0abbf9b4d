#include "hypedyn/sir.hpp"

#include "hypedyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hypedyn::sir {

namespace {

SirState derivative(const SirParams& p, const SirState& s) {
    const double infection = p.contagion_rate * s.active * s.susceptible;
    const double recovery = p.recovery_rate * s.active;
    return {-infection, infection - recovery, recovery};
}

SirState axpy(const SirState& x, double a, const SirState& k) {
    return {x.susceptible + a * k.susceptible, x.active + a * k.active,
            x.recovered + a * k.recovered};
}

SirState rk4(const SirParams& p, const SirState& x, double h) {
    const SirState k1 = derivative(p, x);
    const SirState k2 = derivative(p, axpy(x, 0.5 * h, k1));
    const SirState k3 = derivative(p, axpy(x, 0.5 * h, k2));
    const SirState k4 = derivative(p, axpy(x, h, k3));
    auto comb = [h](double a, double b, double c, double d) { return h / 6.0 * (a + 2 * b + 2 * c + d); };
    return {x.susceptible + comb(k1.susceptible, k2.susceptible, k3.susceptible, k4.susceptible),
            x.active + comb(k1.active, k2.active, k3.active, k4.active),
            x.recovered + comb(k1.recovered, k2.recovered, k3.recovered, k4.recovered)};
}

void validate_state(const SirParams& p, const SirState& s) {
    detail::require(std::isfinite(s.susceptible) && std::isfinite(s.active) &&
                        std::isfinite(s.recovered),
                    "SIR state must be finite");
    detail::require(s.susceptible >= 0.0 && s.active >= 0.0 && s.recovered >= 0.0,
                    "SIR compartments must be non-negative");
    detail::require(std::abs(s.total() - p.population) <= 1e-9 * p.population,
                    "V + A + B must equal N");
}

}  // namespace

void SirParams::validate() const {
    detail::require(std::isfinite(contagion_rate) && contagion_rate >= 0.0,
                    "contagion rate must be >= 0");
    detail::require(std::isfinite(recovery_rate) && recovery_rate > 0.0,
                    "recovery rate must be > 0");
    detail::require(std::isfinite(population) && population > 0.0, "population must be > 0");
}

std::vector<SirSample> integrate(const SirParams& params, const SirState& init, double dt,
                                 double horizon, std::size_t record_stride) {
    params.validate();
    validate_state(params, init);
    detail::require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
    detail::require(std::isfinite(horizon) && horizon >= dt, "horizon must be >= dt");
    detail::require(record_stride >= 1, "record_stride must be >= 1");

    const double n = params.population;
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));

    std::vector<SirSample> out;
    out.reserve(steps / record_stride + 2);
    out.push_back({0.0, init});

    SirState x = init;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double t_prev = dt * static_cast<double>(i - 1);
        const double h = std::min(dt, horizon - t_prev);
        x = rk4(params, x, h);
        const double floor = -1e-12 * n;
        if (x.susceptible < floor || x.active < floor || x.recovered < floor) {
            throw NumericalError("SIR integration: dt = " + std::to_string(dt) +
                                 " drives a compartment negative");
        }
        if (std::abs(x.total() - n) > 1e-9 * n) {
            throw NumericalError("SIR integration: population not conserved");
        }
        if (i % record_stride == 0 || i == steps) {
            out.push_back({i == steps ? horizon : dt * static_cast<double>(i), x});
        }
    }
    return out;
}

ContagionRates derive_rates(double transmissibility, double contact_rate,
                            double infectious_period) {
    detail::require(transmissibility >= 0.0 && transmissibility <= 1.0,
                    "transmissibility must lie in [0, 1]");
    detail::require(std::isfinite(contact_rate) && contact_rate >= 0.0,
                    "contact rate must be >= 0");
    detail::require(std::isfinite(infectious_period) && infectious_period > 0.0,
                    "infectious period must be > 0");
    return {transmissibility * contact_rate, 1.0 / infectious_period};
}

Threshold outbreak_threshold(const SirParams& params, double initial_susceptible) {
    params.validate();
    detail::require(initial_susceptible >= 0.0 && initial_susceptible <= params.population,
                    "V0 must lie in [0, N]");
    const double r0 = params.contagion_rate * initial_susceptible / params.recovery_rate;
    return {r0, r0 > 1.0};
}

FinalSize final_size(const SirParams& params, double initial_active) {
    params.validate();
    const double n = params.population;
    detail::require(initial_active > 0.0 && initial_active < n, "I0 must lie in (0, N)");

    const double ratio = params.contagion_rate / params.recovery_rate;
    FinalSize out;
    out.super_threshold = ratio * (n - initial_active) > 1.0;
    if (ratio == 0.0) {
        out.recovered = initial_active;
        return out;
    }

    // g is concave with g(I0) = ratio * I0 > 0 and g -> -inf as R -> N: one root.
    auto g = [&](double r) { return ratio * r - std::log((n - initial_active) / (n - r)); };
    double lo = initial_active;
    double hi = n;
    const double tol = 1e-9 * n;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    out.recovered = 0.5 * (lo + hi);
    return out;
}

double contagion_ratio_for_final_size(double population, double initial_active,
                                      double final_recovered) {
    detail::require(population > 0.0, "population must be > 0");
    detail::require(initial_active > 0.0 && initial_active < final_recovered &&
                        final_recovered < population,
                    "need 0 < I0 < R_inf < N");
    return std::log((population - initial_active) / (population - final_recovered)) /
           final_recovered;
}

std::vector<SirSample> forecast_interest(const SirParams& params, double initial_active,
                                         double horizon, double dt) {
    params.validate();
    const double n0 = params.population;
    detail::require(initial_active >= 0.0 && initial_active <= n0, "A0 must lie in [0, N0]");
    auto series =
        integrate(params, {n0 - initial_active, initial_active, 0.0}, dt, horizon);
    for (SirSample& s : series) {
        s.state.susceptible /= n0;
        s.state.active /= n0;
        s.state.recovered /= n0;
    }
    return series;
}

}  // namespace hypedyn::sir
