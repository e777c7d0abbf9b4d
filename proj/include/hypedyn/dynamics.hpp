#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hypedyn {

/// Parameters of the sentiment-return map.
///
///   phi_{t+1} = tanh((beta * r_t + alpha * phi_t) / lambda)
///   r_{t+1}   = C * (phi_{t+1} - phi_t)
///
/// gamma (risk aversion) enters the agent utilities symmetrically and
/// cancels from the aggregate map; it is kept so the agent-level model can
/// be simulated as written.
struct ModelParams {
    double alpha = 0.0;     ///< consensus strength
    double beta = 0.0;      ///< trend following
    double gamma = 0.0;     ///< risk aversion
    double lambda = 1.0;    ///< decision-noise scale
    double capacity = 0.0;  ///< C = MN / (pQ)

    /// Throws InvalidArgument unless lambda > 0 and the rest are finite, >= 0.
    void validate() const;

    /// (alpha, beta) rescaled by 1/lambda, lambda set to 1.
    [[nodiscard]] ModelParams normalized() const;
};

/// One point (phi, r) of the system. phi lies in [-1, 1].
struct MarketState {
    double phi = 0.0;
    double ret = 0.0;

    friend bool operator==(const MarketState&, const MarketState&) = default;
};

/// Inputs of the capacity ratio C = M * N / (p * Q).
struct CapacityInputs {
    double per_investor_capital = 0.0;  // M
    double investor_count = 0.0;        // N
    double price = 0.0;                 // p
    double shares_outstanding = 0.0;    // Q

    [[nodiscard]] double capacity() const;
};

struct GumbelFit {
    double location = 0.0;
    double scale = 1.0;
};

inline constexpr double kEulerGamma = 0.57721566490153286;

/// tanh((beta * r + alpha * phi) / lambda).
double aggregate_sentiment(const ModelParams& params, const MarketState& state);

/// Advance one period. `noise` is added to the return equation only.
MarketState step(const ModelParams& params, const MarketState& state, double noise = 0.0);

/// Probability that a single agent turns bullish. Chosen so that
/// 2p - 1 == aggregate_sentiment.
double bullish_probability(const ModelParams& params, const MarketState& state);

/// Iterate `step` with i.i.d. Normal(0, noise_std^2) return shocks.
/// Returns steps + 1 states starting with `init`.
std::vector<MarketState> simulate(const ModelParams& params, const MarketState& init,
                                  std::size_t steps, double noise_std, std::uint64_t seed);

/// Mean of n_agents independent +/-1 choices, each agent maximizing a
/// random utility with type-I extreme value shocks of scale lambda.
double simulate_agents(const ModelParams& params, const MarketState& state,
                       std::size_t n_agents, std::uint64_t seed);

/// Return implied by a change in buying intensity: (M N / p Q) * delta_phi.
double price_return(const CapacityInputs& cap, double delta_phi);

/// Method-of-moments Gumbel fit: scale = s * sqrt(6) / pi,
/// location = mean - scale * kEulerGamma.
GumbelFit fit_gumbel(std::span<const double> samples);

}  // namespace hypedyn
