#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>

namespace hypedyn {

struct SubmissionRecord {
    std::string submission_id;
    std::string author_id;
    std::string ticker;
    std::int64_t timestamp = 0;  ///< seconds since the Unix epoch, UTC
    double p_bull = 0.0;
    double p_bear = 0.0;
    double p_neutral = 1.0;

    friend bool operator==(const SubmissionRecord&, const SubmissionRecord&) = default;
};

struct CommentRecord {
    std::string comment_id;
    std::string author_id;
    std::string submission_id;
    std::int64_t timestamp = 0;

    friend bool operator==(const CommentRecord&, const CommentRecord&) = default;
};

struct MarketRecord {
    std::string ticker;
    std::chrono::sys_days date{};
    double log_return = 0.0;
    double volume = 0.0;
    double market_cap = 0.0;  ///< NaN when absent

    friend bool operator==(const MarketRecord&, const MarketRecord&) = default;
};

/// One ticker-week of the aggregated forum/market panel.
struct WeeklyTickerRow {
    std::string ticker;
    std::string week;           ///< ISO-8601 label, e.g. 2020-W05
    std::int64_t week_index = 0;///< consecutive weeks differ by 1
    double authors = 0.0;       ///< A: unique submission authors on the ticker
    double share = 0.0;         ///< a: A over active users that week
    double sentiment = 0.0;     ///< phi: mean of p_bull - p_bear
    double p_bull = 0.0;        ///< mean class probabilities
    double p_bear = 0.0;
    double p_neutral = 0.0;
    double mean_return = 0.0;   ///< mean daily log-return (NaN without market data)
    double return_variance = 0.0;
    double mean_volume = 0.0;
    double mean_market_cap = 0.0;
    std::size_t submissions = 0;

    friend bool operator==(const WeeklyTickerRow&, const WeeklyTickerRow&) = default;
};

/// The "other stocks" benchmark for one week.
struct WeeklyBenchmark {
    std::string week;
    std::int64_t week_index = 0;
    double active_users = 0.0;
    double other_authors = 0.0;
    double other_share = 0.0;  ///< s_t

    friend bool operator==(const WeeklyBenchmark&, const WeeklyBenchmark&) = default;
};

}  // namespace hypedyn
