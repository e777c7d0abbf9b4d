#include "hypedyn/dynamics.hpp"

#include "hypedyn/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace hypedyn {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void validate_state(const MarketState& s) {
    detail::require(std::isfinite(s.phi) && std::isfinite(s.ret), "state must be finite");
    detail::require(s.phi >= -1.0 && s.phi <= 1.0, "phi must lie in [-1, 1]");
}

double drive(const ModelParams& p, const MarketState& s) {
    return (p.beta * s.ret + p.alpha * s.phi) / p.lambda;
}

}  // namespace

void ModelParams::validate() const {
    detail::require(std::isfinite(lambda) && lambda > 0.0, "lambda must be finite and > 0");
    detail::require(finite_nonneg(alpha), "alpha must be finite and >= 0");
    detail::require(finite_nonneg(beta), "beta must be finite and >= 0");
    detail::require(finite_nonneg(gamma), "gamma must be finite and >= 0");
    detail::require(finite_nonneg(capacity), "capacity must be finite and >= 0");
}

ModelParams ModelParams::normalized() const {
    validate();
    ModelParams p = *this;
    p.alpha = alpha / lambda;
    p.beta = beta / lambda;
    p.lambda = 1.0;
    return p;
}

double CapacityInputs::capacity() const {
    detail::require(per_investor_capital > 0.0 && investor_count > 0.0,
                    "capital and investor count must be positive");
    detail::require(price > 0.0 && shares_outstanding > 0.0,
                    "price and shares outstanding must be positive");
    return per_investor_capital * investor_count / (price * shares_outstanding);
}

double aggregate_sentiment(const ModelParams& params, const MarketState& state) {
    params.validate();
    validate_state(state);
    return std::tanh(drive(params, state));
}

MarketState step(const ModelParams& params, const MarketState& state, double noise) {
    detail::require(std::isfinite(noise), "noise must be finite");
    const double next_phi = aggregate_sentiment(params, state);
    return {next_phi, params.capacity * (next_phi - state.phi) + noise};
}

double bullish_probability(const ModelParams& params, const MarketState& state) {
    params.validate();
    validate_state(state);
    // e^{2x} / (e^{2x} + 1) written as a logistic to stay finite for large |x|.
    return 1.0 / (1.0 + std::exp(-2.0 * drive(params, state)));
}

std::vector<MarketState> simulate(const ModelParams& params, const MarketState& init,
                                  std::size_t steps, double noise_std, std::uint64_t seed) {
    params.validate();
    validate_state(init);
    detail::require(std::isfinite(noise_std) && noise_std >= 0.0, "noise_std must be >= 0");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> shock(0.0, noise_std > 0.0 ? noise_std : 1.0);

    std::vector<MarketState> path;
    path.reserve(steps + 1);
    path.push_back(init);
    for (std::size_t t = 0; t < steps; ++t) {
        const double eps = noise_std > 0.0 ? shock(rng) : 0.0;
        path.push_back(step(params, path.back(), eps));
    }
    return path;
}

double simulate_agents(const ModelParams& params, const MarketState& state,
                       std::size_t n_agents, std::uint64_t seed) {
    params.validate();
    validate_state(state);
    detail::require(n_agents >= 1, "n_agents must be >= 1");

    std::mt19937_64 rng(seed);
    std::extreme_value_distribution<double> shock(0.0, params.lambda);

    const double pull = params.alpha * state.phi + params.beta * state.ret;
    const double risk = params.gamma * state.ret * state.ret;

    long long net = 0;
    for (std::size_t i = 0; i < n_agents; ++i) {
        const double u_buy = shock(rng) + pull - risk;
        const double u_sell = shock(rng) - pull - risk;
        net += u_buy > u_sell ? 1 : -1;
    }
    return static_cast<double>(net) / static_cast<double>(n_agents);
}

double price_return(const CapacityInputs& cap, double delta_phi) {
    detail::require(std::isfinite(delta_phi), "delta_phi must be finite");
    return cap.capacity() * delta_phi;
}

GumbelFit fit_gumbel(std::span<const double> samples) {
    detail::require(samples.size() >= 10, "fit_gumbel needs at least 10 samples");
    double mean = 0.0;
    bool constant = true;
    for (double x : samples) {
        detail::require(std::isfinite(x), "fit_gumbel samples must be finite");
        mean += x;
        constant = constant && x == samples.front();
    }
    if (constant) {
        throw InvalidArgument("fit_gumbel: samples have zero variance");
    }
    mean /= static_cast<double>(samples.size());

    double ss = 0.0;
    for (double x : samples) {
        ss += (x - mean) * (x - mean);
    }
    const double var = ss / static_cast<double>(samples.size() - 1);
    if (!(var > 0.0)) {
        throw InvalidArgument("fit_gumbel: samples have zero variance");
    }

    GumbelFit fit;
    fit.scale = std::sqrt(var) * std::sqrt(6.0) / std::numbers::pi;
    fit.location = mean - fit.scale * kEulerGamma;
    return fit;
}

}  // namespace hypedyn
