#include "hypedyn/estimate.hpp"

#include "hypedyn/error.hpp"
#include "hypedyn/features.hpp"

#include <array>
#include <cmath>
#include <map>

namespace hypedyn::econ {

namespace {

bool finite_all(std::initializer_list<double> xs) {
    for (double x : xs) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

double log_ratio(double num, double den) {
    const double v = std::log(num / den);
    return std::isfinite(v) ? v : kMissing;
}

// Copy of `panel` restricted to `columns`, with `dependent` as the response
// and incomplete rows removed.
PanelDataset subpanel(const PanelDataset& panel, const std::string& dependent,
                      const std::vector<std::string>& columns) {
    PanelDataset out(dependent, columns);
    const auto& y = dependent == panel.dependent_name() ? panel.dependent() : panel.column(dependent);
    std::vector<const std::vector<double>*> src;
    for (const auto& c : columns) {
        src.push_back(&panel.column(c));
    }
    std::vector<double> values(columns.size());
    for (std::size_t i = 0; i < panel.rows(); ++i) {
        bool ok = std::isfinite(y[i]);
        for (std::size_t j = 0; j < columns.size() && ok; ++j) {
            values[j] = (*src[j])[i];
            ok = std::isfinite(values[j]);
        }
        if (ok) {
            out.add_row(panel.groups()[i], panel.times()[i], y[i], values, panel.clusters()[i]);
        }
    }
    return out;
}

FitResult fit_with_effects(const PanelDataset& data, const std::vector<std::string>& regressors,
                           FixedEffects fe, CovarianceType cov) {
    if (!fe.group && !fe.time) {
        return ols(data, {regressors, true, cov, 0});
    }
    const PanelDataset w = within_transform(data, fe);
    return ols(w, {regressors, false, cov, absorbed_levels(data, fe)});
}

IvResult iv_with_effects(const PanelDataset& data, const std::vector<std::string>& endogenous,
                              const std::vector<std::string>& instruments,
                              const std::vector<std::string>& exogenous, FixedEffects fe,
                              CovarianceType cov) {
    const PanelDataset w = within_transform(data, fe);
    IvSpec spec{endogenous, instruments, exogenous, false, cov, absorbed_levels(data, fe)};
    return tsls(w, spec);
}

const std::vector<std::string> kContagionRegressors{"contagion", "share", "lag_return",
                                                    "lag_variance"};
const std::vector<std::string> kSentimentRegressors{"lag_return", "lag_variance", "lag_phi_plus",
                                                    "lag_phi_minus"};

}  // namespace

PanelDataset weekly_change_panel(std::span<const WeeklyTickerRow> rows,
                                 std::span<const WeeklyBenchmark> benchmark) {
    const std::vector<std::string> names{
        "contagion",     "share",         "lag_return",   "lag_variance",      "d_return",
        "d_variance",    "d_volume",      "d_omega",      "d_chi",             "d_omega_abs",
        "d_chi_abs",     "phi_plus",      "phi_minus",    "lag_phi_plus",      "lag_phi_minus",
        "lag_authors",   "lag_other_authors", "lag_sentiment", "lag_market_cap"};
    PanelDataset out("log_odds", names);

    std::map<std::int64_t, const WeeklyBenchmark*> bench;
    for (const auto& b : benchmark) {
        bench[b.week_index] = &b;
    }
    std::map<std::pair<std::string, std::int64_t>, const WeeklyTickerRow*> index;
    for (const auto& r : rows) {
        if (!index.emplace(std::make_pair(r.ticker, r.week_index), &r).second) {
            throw InvalidArgument("duplicate ticker-week " + r.ticker + " " + r.week);
        }
    }

    for (const auto& [key, cur] : index) {
        const auto prev_it = index.find({key.first, key.second - 1});
        if (prev_it == index.end()) {
            continue;
        }
        const WeeklyTickerRow& prev = *prev_it->second;
        const auto b_cur = bench.find(key.second);
        const auto b_prev = bench.find(key.second - 1);

        double y = kMissing;
        if (b_cur != bench.end() && b_cur->second->other_share > 0.0 && cur->share > 0.0) {
            y = share_log_odds(cur->share, b_cur->second->other_share);
        }

        const std::array<double, 2> a{prev.share, cur->share};
        const std::array<double, 2> r{prev.mean_return, cur->mean_return};
        const std::array<double, 2> v{prev.return_variance, cur->return_variance};
        const ContagionRow c = contagion_features(a, r, v).front();

        ImpactVars iv{kMissing, kMissing, kMissing, kMissing};
        if (std::isfinite(prev.mean_market_cap) && prev.mean_market_cap > 0.0) {
            const std::array<ImpactInput, 2> in{
                ImpactInput{key.first, key.second - 1, prev.authors, prev.sentiment, prev.mean_market_cap},
                ImpactInput{key.first, key.second, cur->authors, cur->sentiment, prev.mean_market_cap}};
            iv = market_impact_vars(in)[1];
        }

        const double d_volume = (std::isfinite(prev.mean_volume) && prev.mean_volume > 0.0)
                                    ? (cur->mean_volume - prev.mean_volume) / prev.mean_volume
                                    : kMissing;
        const std::vector<double> values{
            c.contagion,
            c.share,
            c.lag_return,
            c.lag_variance,
            cur->mean_return - prev.mean_return,
            cur->return_variance - prev.return_variance,
            d_volume,
            iv.delta_omega,
            iv.delta_chi,
            iv.delta_omega_abs,
            iv.delta_chi_abs,
            log_ratio(cur->p_bull, cur->p_neutral),
            log_ratio(cur->p_bear, cur->p_neutral),
            log_ratio(prev.p_bull, prev.p_neutral),
            log_ratio(prev.p_bear, prev.p_neutral),
            prev.authors,
            b_prev != bench.end() ? b_prev->second->other_authors : kMissing,
            prev.sentiment,
            prev.mean_market_cap};
        out.add_row(key.first, std::to_string(key.second), y, values, key.first);
    }
    return out;
}

FitResult estimate_contagion(const PanelDataset& changes, const ContagionOptions& options) {
    const PanelDataset data = subpanel(changes, changes.dependent_name(), kContagionRegressors);
    return fit_with_effects(data, kContagionRegressors, {options.ticker_effects, options.week_effects},
                            options.covariance);
}

std::vector<double> fitted_with_week_effects(const PanelDataset& panel,
                                             const std::vector<std::string>& regressors,
                                             FitResult* fit) {
    // Keep the source row of every complete case so fitted values can be scattered back.
    std::vector<std::string> cols = regressors;
    cols.emplace_back("__row");
    PanelDataset tagged = panel;
    std::vector<double> row_ids(panel.rows());
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
        row_ids[i] = static_cast<double>(i);
    }
    tagged.add_column("__row", row_ids);
    const PanelDataset data = subpanel(tagged, panel.dependent_name(), cols);

    FitResult f = fit_with_effects(data, regressors, {false, true}, CovarianceType::Cluster);
    std::vector<double> out(panel.rows(), kMissing);
    const auto& ids = data.column("__row");
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out[static_cast<std::size_t>(ids[i])] =
            data.dependent()[i] - f.residuals(static_cast<Eigen::Index>(i));
    }
    if (fit) {
        *fit = std::move(f);
    }
    return out;
}

ImpactResult estimate_impact(const PanelDataset& changes, const ImpactOptions& options) {
    ImpactResult out;
    out.data = changes;
    PanelDataset& d = out.data;
    const std::size_t n = d.rows();

    const auto l_hat = fitted_with_week_effects(d, kContagionRegressors, &out.contagion_stage);

    PanelDataset bull = d;
    bull.dependent() = d.column("phi_plus");
    PanelDataset bear = d;
    bear.dependent() = d.column("phi_minus");
    const auto plus_hat = fitted_with_week_effects(bull, kSentimentRegressors, &out.bull_stage);
    const auto minus_hat = fitted_with_week_effects(bear, kSentimentRegressors, &out.bear_stage);

    std::vector<double> omega_hat(n, kMissing), omega_abs_hat(n, kMissing);
    std::vector<double> chi_hat(n, kMissing), chi_abs_hat(n, kMissing);
    const auto& lag_a = d.column("lag_authors");
    const auto& lag_v = d.column("lag_other_authors");
    const auto& lag_phi = d.column("lag_sentiment");
    const auto& lag_q = d.column("lag_market_cap");
    for (std::size_t i = 0; i < n; ++i) {
        if (!finite_all({lag_a[i], lag_phi[i], lag_q[i]}) || !(lag_q[i] > 0.0)) {
            continue;
        }
        if (finite_all({l_hat[i], lag_v[i]})) {
            const double a_hat = predict_author_count(l_hat[i], lag_v[i]);
            omega_hat[i] = lag_phi[i] / lag_q[i] * (a_hat - lag_a[i]);
            omega_abs_hat[i] = std::abs(lag_phi[i]) / lag_q[i] * (a_hat - lag_a[i]);
        }
        if (finite_all({plus_hat[i], minus_hat[i]})) {
            const double phi_hat = reconstruct_phi_hat(plus_hat[i], minus_hat[i]);
            chi_hat[i] = lag_a[i] / lag_q[i] * (phi_hat - lag_phi[i]);
            chi_abs_hat[i] = lag_a[i] / lag_q[i] * (std::abs(phi_hat) - std::abs(lag_phi[i]));
        }
    }
    d.add_column("d_omega_hat", std::move(omega_hat));
    d.add_column("d_chi_hat", std::move(chi_hat));
    d.add_column("d_omega_abs_hat", std::move(omega_abs_hat));
    d.add_column("d_chi_abs_hat", std::move(chi_abs_hat));

    struct Spec {
        const char* outcome;
        std::vector<std::string> regressors;
        std::vector<std::string> instruments;
    };
    const std::array<Spec, 3> specs{
        Spec{"d_return", {"d_omega", "d_chi"}, {"d_omega_hat", "d_chi_hat"}},
        Spec{"d_variance", {"d_omega_abs", "d_chi_abs"}, {"d_omega_abs_hat", "d_chi_abs_hat"}},
        Spec{"d_volume", {"d_omega_abs", "d_chi_abs"}, {"d_omega_abs_hat", "d_chi_abs_hat"}}};

    for (const auto& s : specs) {
        ImpactEquation eq;
        eq.outcome = s.outcome;
        eq.regressors = s.regressors;
        eq.reduced_form =
            fit_with_effects(subpanel(d, s.outcome, s.regressors), s.regressors, {false, true},
                             options.covariance);
        if (options.instrument) {
            std::vector<std::string> cols = s.regressors;
            cols.insert(cols.end(), s.instruments.begin(), s.instruments.end());
            eq.iv = iv_with_effects(subpanel(d, s.outcome, cols), s.regressors, s.instruments, {},
                                         {false, true}, options.covariance);
        }
        out.equations.push_back(std::move(eq));
    }
    return out;
}

PanelDataset frequent_posters_panel(std::span<const FrequentPosterRow> rows) {
    PanelDataset out("sentiment", {"peer_mean", "instrument_mean", "previous_sentiment"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const std::array<double, 3> v{r.peer_mean, r.instrument_mean, r.previous_sentiment};
        out.add_row(r.ticker, std::to_string(i), r.sentiment, v, r.ticker);
    }
    return out;
}

PanelDataset network_panel(const CommenterNetwork& network) {
    PanelDataset out("sentiment", {"neighbor_mean", "two_hop_mean", "lagged_category"});
    for (const auto& r : network.rows) {
        const std::array<double, 3> v{r.neighbor_mean, r.two_hop_mean, r.lagged_category};
        out.add_row(r.ticker, r.submission_id, r.sentiment, v, r.ticker);
    }
    return out;
}

PeerEstimates estimate_peers(std::span<const SentimentPost> posts,
                             std::span<const CommentRecord> comments, std::uint64_t seed,
                             CovarianceType covariance) {
    const FixedEffects ticker{true, false};
    PeerEstimates out;

    const auto rows = frequent_posters_dataset(posts);
    out.frequent_rows = rows.size();
    const PanelDataset fp = frequent_posters_panel(rows);
    out.frequent_ols = fit_with_effects(subpanel(fp, "sentiment", {"peer_mean", "previous_sentiment"}),
                                        {"peer_mean", "previous_sentiment"}, ticker, covariance);
    out.frequent_iv = iv_with_effects(
        subpanel(fp, "sentiment", {"peer_mean", "instrument_mean", "previous_sentiment"}),
        {"peer_mean"}, {"instrument_mean"}, {"previous_sentiment"}, ticker, covariance);

    const auto rewired = placebo_rewire(rows, posts, seed);
    const PanelDataset pl = frequent_posters_panel(rewired);
    out.placebo_ols = fit_with_effects(subpanel(pl, "sentiment", {"peer_mean", "previous_sentiment"}),
                                       {"peer_mean", "previous_sentiment"}, ticker, covariance);
    try {
        out.placebo_iv = iv_with_effects(
            subpanel(pl, "sentiment", {"peer_mean", "instrument_mean", "previous_sentiment"}),
            {"peer_mean"}, {"instrument_mean"}, {"previous_sentiment"}, ticker, covariance);
    } catch (const InvalidArgument&) {
        // Rewired cohorts drawn from early posts often lack prior posts, leaving no instrument.
    } catch (const NumericalError&) {
    }

    if (!comments.empty()) {
        const auto net = commenter_network_dataset(posts, comments);
        const PanelDataset np = subpanel(network_panel(net), "sentiment",
                                         {"neighbor_mean", "two_hop_mean", "lagged_category"});
        out.network_rows = np.rows();
        out.network_iv = iv_with_effects(np, {"neighbor_mean"}, {"two_hop_mean"},
                                              {"lagged_category"}, ticker, covariance);
    }
    return out;
}

}  // namespace hypedyn::econ
