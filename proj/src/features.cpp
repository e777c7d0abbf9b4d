#include "hypedyn/features.hpp"

#include "hypedyn/error.hpp"
#include "hypedyn/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace hypedyn::econ {

std::vector<ContagionRow> contagion_features(std::span<const double> share,
                                             std::span<const double> mean_return,
                                             std::span<const double> variance) {
    detail::require(share.size() == mean_return.size() && share.size() == variance.size(),
                    "contagion_features: series lengths differ");
    for (double a : share) {
        detail::require(a >= 0.0 && a <= 1.0, "author share must lie in [0, 1]");
    }
    std::vector<ContagionRow> out;
    for (std::size_t t = 1; t < share.size(); ++t) {
        const double a = share[t - 1];
        out.push_back({a * (1.0 - a), a, mean_return[t - 1], variance[t - 1]});
    }
    return out;
}

double share_log_odds(double share, double benchmark_share) {
    detail::require(share > 0.0 && benchmark_share > 0.0, "log-odds need positive shares");
    return std::log(share / benchmark_share);
}

double contagion_ratio_multiplier(double c, double d, double a_from, double a_to) {
    auto l = [&](double a) { return c * a * (1.0 - a) + d * a; };
    return std::exp(l(a_to) - l(a_from));
}

double interpret_log_odds(double coef, double delta) {
    detail::require(std::isfinite(coef) && std::isfinite(delta), "inputs must be finite");
    return std::exp(coef * delta);
}

SentimentTriple clip_sentiment(double p_bull, double p_bear, double p_neutral) {
    for (double p : {p_bull, p_bear, p_neutral}) {
        detail::require(std::isfinite(p) && p >= 0.0, "sentiment probabilities must be >= 0");
    }
    detail::require(std::abs(p_bull + p_bear + p_neutral - 1.0) <= 1e-6,
                    "sentiment probabilities must sum to 1");

    const bool bull_dominant = p_bull >= p_bear;
    double top = bull_dominant ? p_bull : p_bear;
    double minor = bull_dominant ? p_bear : p_bull;
    double neutral = p_neutral;

    if (top >= kSentimentCap || minor == 0.0) {
        const double capped = std::min(top, kSentimentCap);
        const double slack = 1.0 - capped;
        const double rest = minor + neutral;
        if (minor == 0.0) {
            // Proportional sharing would leave the minor class at zero.
            minor = 0.5 * slack;
            neutral = 0.5 * slack;
        } else {
            minor = slack * minor / rest;
            neutral = slack * neutral / rest;
        }
        top = capped;
    }
    return bull_dominant ? SentimentTriple{top, minor, neutral} : SentimentTriple{minor, top, neutral};
}

double sentiment_logodds(double p_bull, double p_bear, double p_neutral) {
    const SentimentTriple t = clip_sentiment(p_bull, p_bear, p_neutral);
    if (p_bull == p_bear) {
        return 0.0;  // includes the all-neutral triple
    }
    return 0.5 * std::log(t.bull / t.bear);
}

std::vector<ImpactVars> market_impact_vars(std::span<const ImpactInput> rows) {
    std::map<std::pair<std::string, std::int64_t>, std::size_t> index;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        detail::require(r.market_cap > 0.0, "market cap must be > 0 (" + r.ticker + ")");
        detail::require(r.sentiment >= -1.0 && r.sentiment <= 1.0, "phi must lie in [-1, 1]");
        if (!index.emplace(std::make_pair(r.ticker, r.week), i).second) {
            throw InvalidArgument("duplicate ticker-week in impact input: " + r.ticker);
        }
    }
    std::vector<ImpactVars> out(rows.size(), {kMissing, kMissing, kMissing, kMissing});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& cur = rows[i];
        const auto it = index.find({cur.ticker, cur.week - 1});
        if (it == index.end()) {
            continue;
        }
        const auto& prev = rows[it->second];
        const double dA = cur.authors - prev.authors;
        out[i].delta_omega = prev.sentiment / prev.market_cap * dA;
        out[i].delta_chi = prev.authors / prev.market_cap * (cur.sentiment - prev.sentiment);
        out[i].delta_omega_abs = std::abs(prev.sentiment) / prev.market_cap * dA;
        out[i].delta_chi_abs =
            prev.authors / prev.market_cap * (std::abs(cur.sentiment) - std::abs(prev.sentiment));
    }
    return out;
}

double reconstruct_phi_hat(double log_odds_bull, double log_odds_bear) {
    detail::require(std::isfinite(log_odds_bull) && std::isfinite(log_odds_bear),
                    "log-odds must be finite");
    const double m = std::max({0.0, log_odds_bull, log_odds_bear});
    const double up = std::exp(log_odds_bull - m);
    const double down = std::exp(log_odds_bear - m);
    return (up - down) / (std::exp(-m) + up + down);
}

double predict_author_count(double predicted_log_odds, double previous_count) {
    detail::require(previous_count >= 0.0, "previous author count must be >= 0");
    return previous_count * std::exp(predicted_log_odds);
}

}  // namespace hypedyn::econ
