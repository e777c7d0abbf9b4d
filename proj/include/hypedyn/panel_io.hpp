#pragma once

#include "hypedyn/records.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypedyn::io {

/// Parsed CSV body. `lines[i]` is the 1-based source line of `rows[i]`.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;
};

/// RFC 4180 style: comma separated, double-quoted fields may contain commas,
/// quotes ("") and newlines. Blank lines are skipped. Throws on an empty input.
CsvTable read_csv(std::istream& in, std::string_view source = "<input>");

/// Quotes a field only when needed.
std::string csv_field(std::string_view text);
/// Shortest round-trip decimal form; NaN becomes an empty field.
std::string format_double(double x);
/// Strict parse of a whole field; empty field gives NaN when `allow_empty`.
double parse_double(std::string_view text, bool allow_empty = false);

/// Accepts integer Unix seconds or `YYYY-MM-DDTHH:MM:SS[Z]` (UTC).
std::int64_t parse_timestamp(std::string_view text);
std::chrono::sys_days parse_date(std::string_view text);
std::string format_date(std::chrono::sys_days day);

std::vector<SubmissionRecord> read_submissions(std::istream& in, std::string_view source = "<input>");
std::vector<CommentRecord> read_comments(std::istream& in, std::string_view source = "<input>");
std::vector<MarketRecord> read_market(std::istream& in, std::string_view source = "<input>");
std::vector<std::chrono::sys_days> read_calendar(std::istream& in, std::string_view source = "<input>");

std::vector<SubmissionRecord> load_submissions(const std::filesystem::path& path);
std::vector<CommentRecord> load_comments(const std::filesystem::path& path);
std::vector<MarketRecord> load_market(const std::filesystem::path& path);
std::vector<std::chrono::sys_days> load_calendar(const std::filesystem::path& path);

void write_submissions(std::ostream& out, std::span<const SubmissionRecord> rows);
void write_comments(std::ostream& out, std::span<const CommentRecord> rows);
void write_market(std::ostream& out, std::span<const MarketRecord> rows);
void write_calendar(std::ostream& out, std::span<const std::chrono::sys_days> days);

/// UTC offset of US Eastern time in seconds (-18000 or -14400), using the
/// federal DST rules in force since 1987.
std::int64_t eastern_offset(std::int64_t utc_seconds);

/// Sorted set of trading dates.
class TradingCalendar {
public:
    explicit TradingCalendar(std::vector<std::chrono::sys_days> days);

    /// Trading date whose return a post at `utc_seconds` is matched with:
    /// the same Eastern date if it is a trading day and the post precedes
    /// 16:00:00 Eastern, otherwise the next trading date. Throws when the
    /// result falls outside the calendar.
    [[nodiscard]] std::chrono::sys_days align(std::int64_t utc_seconds) const;
    [[nodiscard]] bool contains(std::chrono::sys_days day) const;
    [[nodiscard]] const std::vector<std::chrono::sys_days>& days() const { return days_; }

private:
    std::vector<std::chrono::sys_days> days_;
};

std::chrono::sys_days align_to_trading_day(std::int64_t utc_seconds, const TradingCalendar& calendar);

/// Calendar date in US Eastern time.
std::chrono::sys_days eastern_date(std::int64_t utc_seconds);

struct IsoWeek {
    int year = 0;
    unsigned week = 0;
    std::int64_t index = 0;  ///< weeks since the week of 1970-01-01; consecutive weeks differ by 1
};
IsoWeek iso_week(std::chrono::sys_days day);
std::string week_label(const IsoWeek& week);

/// Drops every record by authors who exceed `max_per_month` submissions plus
/// comments in any UTC calendar month.
struct BotFilterResult {
    std::vector<SubmissionRecord> submissions;
    std::vector<CommentRecord> comments;
    std::vector<std::string> removed_authors;  ///< sorted
};
BotFilterResult filter_bots(std::span<const SubmissionRecord> submissions,
                            std::span<const CommentRecord> comments, std::size_t max_per_month = 100);

enum class Denominator { Authors, AuthorsAndCommenters };

struct AggregateOptions {
    std::size_t benchmark_threshold = 31;  ///< tickers with fewer submissions in the whole sample form "other stocks"
    Denominator denominator = Denominator::Authors;
    const TradingCalendar* calendar = nullptr;  ///< when set, posts are bucketed by their aligned trading day
};

struct WeeklyPanel {
    std::vector<WeeklyTickerRow> rows;  ///< sorted by ticker, then week
    std::vector<WeeklyBenchmark> benchmark;  ///< one per week with activity, sorted by week
};

/// Ticker-week panel. Without a calendar a post belongs to the ISO week of its
/// Eastern calendar date. Market fields are NaN for weeks without market rows.
WeeklyPanel weekly_aggregate(std::span<const SubmissionRecord> submissions,
                             std::span<const MarketRecord> market,
                             std::span<const CommentRecord> comments = {},
                             const AggregateOptions& options = {});

void write_weekly(std::ostream& out, std::span<const WeeklyTickerRow> rows);
std::vector<WeeklyTickerRow> read_weekly(std::istream& in, std::string_view source = "<input>");
void write_benchmark(std::ostream& out, std::span<const WeeklyBenchmark> rows);
std::vector<WeeklyBenchmark> read_benchmark(std::istream& in, std::string_view source = "<input>");

}  // namespace hypedyn::io
