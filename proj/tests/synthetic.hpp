#pragma once

// Weekly forum/market panels drawn from a known data-generating process:
//   log(a_t / s_t) = eta_t + c a_{t-1}(1 - a_{t-1}) + d a_{t-1} + b_r r_{t-1} + b_v v_{t-1} + e
//   r_t - r_{t-1}  = eta^r_t + g_omega dOmega_t + g_chi dChi_t + e^r
//   (V_t - V_{t-1}) / V_{t-1} = eta^V_t + h_omega |dOmega|_t + h_chi |dChi|_t + e^V
// with week effects eta and errors independent across tickers and weeks.

#include "hypedyn/records.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace synthetic {

struct Truth {
    double c = 8.0;
    double d = -6.0;
    double b_return = 3.0;
    double b_variance = 300.0;
    double g_omega = 0.01;
    double g_chi = -0.005;
    double h_omega = 0.02;
    double h_chi = 0.015;
};

struct Panel {
    std::vector<hypedyn::WeeklyTickerRow> rows;
    std::vector<hypedyn::WeeklyBenchmark> benchmark;
};

inline Panel generate(std::mt19937_64& rng, const Truth& truth = {}, int tickers = 40, int weeks = 30) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Panel out;

    const auto nw = static_cast<std::size_t>(weeks);
    std::vector<double> users(nw), other(nw), eta(nw), eta_r(nw), eta_v(nw);
    for (int t = 0; t < weeks; ++t) {
        users[t] = 10000.0 * (0.8 + 0.4 * u(rng));
        other[t] = 0.05 + 0.05 * u(rng);
        eta[t] = std::log(0.06 / other[t]) + 0.1 * z(rng);
        eta_r[t] = 0.005 * z(rng);
        eta_v[t] = 0.02 * z(rng);
        out.benchmark.push_back({"w" + std::to_string(t), t, users[t], other[t] * users[t], other[t]});
    }

    for (int k = 0; k < tickers; ++k) {
        hypedyn::WeeklyTickerRow prev;
        for (int t = 0; t < weeks; ++t) {
            hypedyn::WeeklyTickerRow row;
            row.ticker = "T" + std::to_string(k);
            row.week = "w" + std::to_string(t);
            row.week_index = t;
            row.p_bull = 0.2 + 0.3 * u(rng);
            row.p_bear = 0.1 + 0.3 * u(rng);
            row.p_neutral = 1.0 - row.p_bull - row.p_bear;
            row.sentiment = row.p_bull - row.p_bear;
            row.return_variance = 1e-4 + 9e-4 * u(rng);
            row.mean_market_cap = 50.0 + 100.0 * u(rng);
            row.submissions = 1;
            if (t == 0) {
                row.share = 0.06 * std::exp(0.4 * z(rng));
                row.mean_return = 0.01 * z(rng);
                row.mean_volume = 1000.0;
            } else {
                const double a = prev.share;
                double share;
                do {
                    const double l = eta[t] + truth.c * a * (1 - a) + truth.d * a +
                                     truth.b_return * prev.mean_return +
                                     truth.b_variance * prev.return_variance + 0.4 * z(rng);
                    share = other[t] * std::exp(l);
                } while (share >= 1.0);
                row.share = share;
            }
            row.authors = row.share * users[t];
            if (t > 0) {
                const double q = prev.mean_market_cap;
                const double d_omega = prev.sentiment / q * (row.authors - prev.authors);
                const double d_chi = prev.authors / q * (row.sentiment - prev.sentiment);
                const double d_omega_abs = std::abs(prev.sentiment) / q * (row.authors - prev.authors);
                const double d_chi_abs =
                    prev.authors / q * (std::abs(row.sentiment) - std::abs(prev.sentiment));
                row.mean_return = prev.mean_return + eta_r[t] + truth.g_omega * d_omega +
                                  truth.g_chi * d_chi + 0.01 * z(rng);
                row.mean_volume = prev.mean_volume * (1.0 + eta_v[t] + truth.h_omega * d_omega_abs +
                                                      truth.h_chi * d_chi_abs + 0.05 * z(rng));
            }
            out.rows.push_back(row);
            prev = row;
        }
    }
    return out;
}

}  // namespace synthetic
