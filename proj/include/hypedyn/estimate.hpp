#pragma once

#include "hypedyn/panel.hpp"
#include "hypedyn/peers.hpp"
#include "hypedyn/records.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypedyn::econ {

/// Week-on-week ticker panel: one row per ticker observed in consecutive
/// weeks t-1 and t. Group is the ticker, time the week index, cluster the ticker.
///
/// Columns: log_odds (dependent, log(a_t / s_t)), contagion, share,
/// lag_return, lag_variance, d_return, d_variance, d_volume, d_omega, d_chi,
/// d_omega_abs, d_chi_abs, phi_plus, phi_minus, lag_phi_plus, lag_phi_minus,
/// lag_authors, lag_other_authors, lag_sentiment, lag_market_cap.
PanelDataset weekly_change_panel(std::span<const WeeklyTickerRow> rows,
                                 std::span<const WeeklyBenchmark> benchmark);

struct ContagionOptions {
    bool ticker_effects = false;
    bool week_effects = false;
    CovarianceType covariance = CovarianceType::Cluster;
};

/// log(a_t / s_t) on a(1-a), a, lagged mean return and lagged variance.
FitResult estimate_contagion(const PanelDataset& changes, const ContagionOptions& options = {});

/// Fitted values of an OLS with week fixed effects, as a full-length column
/// of `panel` (NaN where the row was not used).
std::vector<double> fitted_with_week_effects(const PanelDataset& panel,
                                             const std::vector<std::string>& regressors,
                                             FitResult* fit = nullptr);

struct ImpactEquation {
    std::string outcome;                 ///< d_return, d_variance or d_volume
    std::vector<std::string> regressors; ///< observed contagion/consensus measures
    FitResult reduced_form;
    std::optional<IvResult> iv;          ///< instrumented by the first-stage predictions
};

struct ImpactResult {
    FitResult contagion_stage;  ///< l(a) with week effects
    FitResult bull_stage;       ///< Phi+ with week effects
    FitResult bear_stage;       ///< Phi- with week effects
    std::vector<ImpactEquation> equations;
    PanelDataset data;          ///< changes panel with predicted measures appended
};

struct ImpactOptions {
    bool instrument = true;
    CovarianceType covariance = CovarianceType::Cluster;
};

/// Market impact regressions with week fixed effects. The first stage
/// predicts the author count from the contagion model and the sentiment
/// log-odds from lagged returns and sentiment, then rebuilds the predicted
/// contagion and consensus measures (columns d_omega_hat, d_chi_hat,
/// d_omega_abs_hat, d_chi_abs_hat).
ImpactResult estimate_impact(const PanelDataset& changes, const ImpactOptions& options = {});

struct PeerEstimates {
    FitResult frequent_ols;
    IvResult frequent_iv;
    FitResult placebo_ols;
    std::optional<IvResult> placebo_iv;  ///< absent when too few rewired rows keep an instrument
    std::optional<IvResult> network_iv;  ///< absent without comments
    std::size_t frequent_rows = 0;
    std::size_t network_rows = 0;
};

PanelDataset frequent_posters_panel(std::span<const FrequentPosterRow> rows);
PanelDataset network_panel(const CommenterNetwork& network);

/// Peer-effect regressions, all with ticker fixed effects and clustered by ticker.
PeerEstimates estimate_peers(std::span<const SentimentPost> posts,
                             std::span<const CommentRecord> comments, std::uint64_t seed,
                             CovarianceType covariance = CovarianceType::Cluster);

}  // namespace hypedyn::econ
