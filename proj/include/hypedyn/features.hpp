#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hypedyn::econ {

/// Regressors of the author-share contagion model for week t, built from week t-1.
struct ContagionRow {
    double contagion = 0.0;     ///< a_{t-1} (1 - a_{t-1})
    double share = 0.0;         ///< a_{t-1}
    double lag_return = 0.0;    ///< mean log-return in t-1
    double lag_variance = 0.0;  ///< variance of log-returns in t-1
};

/// Row t of the result (t = 1..T-1) holds the lagged regressors for week t.
/// Throws if any share lies outside [0, 1].
std::vector<ContagionRow> contagion_features(std::span<const double> share,
                                             std::span<const double> mean_return,
                                             std::span<const double> variance);

/// log(a / s): log-odds of posting about a ticker over the benchmark group.
double share_log_odds(double share, double benchmark_share);

/// exp(Delta l) when the lagged share moves from a_from to a_to under
/// l = c a (1 - a) + d a + ...
double contagion_ratio_multiplier(double c, double d, double a_from, double a_to);

/// Log-odds change for a doubling of peer odds.
inline constexpr double kPeerOddsDoubling = 0.69314718055994531;

/// Odds multiplier exp(coef * delta).
double interpret_log_odds(double coef, double delta);

/// Probability cap applied to a fully dominant sentiment class.
inline constexpr double kSentimentCap = 0.98;

/// Half log-odds of bullish over bearish sentiment, 0.5 * ln(p_bull / p_bear),
/// after clipping degenerate triples so the value stays finite.
double sentiment_logodds(double p_bull, double p_bear, double p_neutral);

/// Clipped probability triple used by `sentiment_logodds`.
struct SentimentTriple {
    double bull = 0.0;
    double bear = 0.0;
    double neutral = 0.0;
};
SentimentTriple clip_sentiment(double p_bull, double p_bear, double p_neutral);

/// One ticker-week of the market-impact construction.
struct ImpactInput {
    std::string ticker;
    std::int64_t week = 0;   ///< consecutive integer week index
    double authors = 0.0;    ///< A
    double sentiment = 0.0;  ///< phi in [-1, 1]
    double market_cap = 0.0; ///< q > 0
};

struct ImpactVars {
    double delta_omega = 0.0;      ///< phi_{t-1} / q_{t-1} (A_t - A_{t-1})
    double delta_chi = 0.0;        ///< A_{t-1} / q_{t-1} (phi_t - phi_{t-1})
    double delta_omega_abs = 0.0;  ///< |phi_{t-1}| variant
    double delta_chi_abs = 0.0;    ///< |phi_t| - |phi_{t-1}| variant
};

/// Same order as `rows`. A row whose ticker has no entry for week - 1 is
/// all-missing (NaN), which covers the first week of every ticker.
std::vector<ImpactVars> market_impact_vars(std::span<const ImpactInput> rows);

/// (e^{Phi+} - e^{Phi-}) / (1 + e^{Phi+} + e^{Phi-}), in (-1, 1).
double reconstruct_phi_hat(double log_odds_bull, double log_odds_bear);

/// V_{t-1} * exp(l_hat).
double predict_author_count(double predicted_log_odds, double previous_count);

}  // namespace hypedyn::econ
