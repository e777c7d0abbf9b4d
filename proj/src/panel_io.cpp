#include "hypedyn/panel_io.hpp"

#include "hypedyn/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace hypedyn::io {

namespace chr = std::chrono;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

std::int64_t parse_int(std::string_view text) {
    std::int64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidArgument("not an integer: '" + std::string(text) + "'");
    }
    return value;
}

void expect_header(const CsvTable& table, std::initializer_list<std::string_view> names,
                   std::string_view source) {
    const std::vector<std::string> want(names.begin(), names.end());
    if (table.header != want) {
        std::string msg = std::string(source) + ": header must be '";
        for (std::size_t i = 0; i < want.size(); ++i) {
            msg += (i ? "," : "") + want[i];
        }
        throw InvalidArgument(msg + "'");
    }
}

// Runs `parse` on every row, prefixing errors with the source line.
template <typename T, typename F>
std::vector<T> parse_rows(const CsvTable& table, std::string_view source, F parse) {
    std::vector<T> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != table.header.size()) {
            throw InvalidArgument(where(source, table.lines[i]) + "expected " +
                                  std::to_string(table.header.size()) + " fields, got " +
                                  std::to_string(row.size()));
        }
        try {
            out.push_back(parse(row));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(where(source, table.lines[i]) + e.what());
        }
    }
    return out;
}

void require_nonempty(const std::string& value, const char* field) {
    if (value.empty()) {
        throw InvalidArgument(std::string(field) + " is empty");
    }
}

template <typename Stream>
Stream open(const std::filesystem::path& path) {
    Stream s(path);
    if (!s) {
        throw InvalidArgument("cannot open " + path.string());
    }
    return s;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) {
        return kNaN;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

// Population variance.
double variance(const std::vector<double>& v) {
    if (v.empty()) {
        return kNaN;
    }
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(v.size());
}

}  // namespace

CsvTable read_csv(std::istream& in, std::string_view source) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> lines;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        const bool blank = record.empty() && !field_started && field.empty();
        if (!blank) {
            end_field();
            records.push_back(std::move(record));
            lines.push_back(record_line);
        }
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') {
                    ++line;
                }
                field += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (!field.empty()) {
                    throw InvalidArgument(where(source, line) + "stray quote");
                }
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                field_started = true;
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                record_line = line;
                break;
            default:
                field += ch;
        }
    }
    if (quoted) {
        throw InvalidArgument(where(source, record_line) + "unterminated quote");
    }
    end_record();

    if (records.empty()) {
        throw InvalidArgument(std::string(source) + ": empty file");
    }
    CsvTable table;
    table.header = std::move(records.front());
    table.rows.assign(std::make_move_iterator(records.begin() + 1),
                      std::make_move_iterator(records.end()));
    table.lines.assign(lines.begin() + 1, lines.end());
    return table;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(text);
    }
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    out += '"';
    return out;
}

std::string format_double(double x) {
    if (std::isnan(x)) {
        return {};
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

double parse_double(std::string_view text, bool allow_empty) {
    if (text.empty()) {
        if (allow_empty) {
            return kNaN;
        }
        throw InvalidArgument("missing number");
    }
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidArgument("not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::int64_t parse_timestamp(std::string_view text) {
    if (text.empty()) {
        throw InvalidArgument("missing timestamp");
    }
    if (text.find('-') == std::string_view::npos || text.front() == '-') {
        try {
            return parse_int(text);
        } catch (const InvalidArgument&) {
            throw InvalidArgument("unparsable timestamp '" + std::string(text) + "'");
        }
    }
    // YYYY-MM-DDTHH:MM:SS with optional trailing Z
    std::string_view t = text;
    if (t.back() == 'Z') {
        t.remove_suffix(1);
    }
    if (t.size() != 19 || (t[10] != 'T' && t[10] != ' ') || t[13] != ':' || t[16] != ':') {
        throw InvalidArgument("unparsable timestamp '" + std::string(text) + "'");
    }
    try {
        const auto day = parse_date(t.substr(0, 10));
        const auto h = parse_int(t.substr(11, 2));
        const auto m = parse_int(t.substr(14, 2));
        const auto s = parse_int(t.substr(17, 2));
        if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 60) {
            throw InvalidArgument("bad time of day");
        }
        return day.time_since_epoch().count() * 86400 + h * 3600 + m * 60 + s;
    } catch (const InvalidArgument&) {
        throw InvalidArgument("unparsable timestamp '" + std::string(text) + "'");
    }
}

chr::sys_days parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw InvalidArgument("unparsable date '" + std::string(text) + "'");
    }
    const chr::year_month_day ymd{chr::year(static_cast<int>(parse_int(text.substr(0, 4)))),
                                  chr::month(static_cast<unsigned>(parse_int(text.substr(5, 2)))),
                                  chr::day(static_cast<unsigned>(parse_int(text.substr(8, 2))))};
    if (!ymd.ok()) {
        throw InvalidArgument("invalid date '" + std::string(text) + "'");
    }
    return chr::sys_days(ymd);
}

std::string format_date(chr::sys_days day) {
    const chr::year_month_day ymd(day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::vector<SubmissionRecord> read_submissions(std::istream& in, std::string_view source) {
    const auto table = read_csv(in, source);
    expect_header(table, {"submission_id", "author_id", "ticker", "timestamp_utc", "p_bull", "p_bear",
                          "p_neutral"},
                  source);
    return parse_rows<SubmissionRecord>(table, source, [](const std::vector<std::string>& f) {
        SubmissionRecord r{f[0], f[1], f[2], parse_timestamp(f[3]), parse_double(f[4]),
                           parse_double(f[5]), parse_double(f[6])};
        require_nonempty(r.submission_id, "submission_id");
        require_nonempty(r.author_id, "author_id");
        require_nonempty(r.ticker, "ticker");
        const double sum = r.p_bull + r.p_bear + r.p_neutral;
        if (r.p_bull < 0.0 || r.p_bear < 0.0 || r.p_neutral < 0.0 || std::abs(sum - 1.0) > 1e-6) {
            throw InvalidArgument("probabilities not on the simplex (sum " + format_double(sum) + ")");
        }
        return r;
    });
}

std::vector<CommentRecord> read_comments(std::istream& in, std::string_view source) {
    const auto table = read_csv(in, source);
    expect_header(table, {"comment_id", "author_id", "submission_id", "timestamp_utc"}, source);
    return parse_rows<CommentRecord>(table, source, [](const std::vector<std::string>& f) {
        CommentRecord r{f[0], f[1], f[2], parse_timestamp(f[3])};
        require_nonempty(r.comment_id, "comment_id");
        require_nonempty(r.author_id, "author_id");
        require_nonempty(r.submission_id, "submission_id");
        return r;
    });
}

std::vector<MarketRecord> read_market(std::istream& in, std::string_view source) {
    const auto table = read_csv(in, source);
    expect_header(table, {"ticker", "date", "log_return", "volume", "market_cap"}, source);
    return parse_rows<MarketRecord>(table, source, [](const std::vector<std::string>& f) {
        MarketRecord r{f[0], parse_date(f[1]), parse_double(f[2]), parse_double(f[3], true),
                       parse_double(f[4], true)};
        require_nonempty(r.ticker, "ticker");
        if (!std::isnan(r.market_cap) && !(r.market_cap > 0.0)) {
            throw InvalidArgument("market_cap must be positive");
        }
        if (!std::isfinite(r.log_return)) {
            throw InvalidArgument("log_return must be finite");
        }
        return r;
    });
}

std::vector<chr::sys_days> read_calendar(std::istream& in, std::string_view source) {
    const auto table = read_csv(in, source);
    expect_header(table, {"date"}, source);
    return parse_rows<chr::sys_days>(table, source,
                                     [](const std::vector<std::string>& f) { return parse_date(f[0]); });
}

std::vector<SubmissionRecord> load_submissions(const std::filesystem::path& path) {
    auto in = open<std::ifstream>(path);
    return read_submissions(in, path.string());
}

std::vector<CommentRecord> load_comments(const std::filesystem::path& path) {
    auto in = open<std::ifstream>(path);
    return read_comments(in, path.string());
}

std::vector<MarketRecord> load_market(const std::filesystem::path& path) {
    auto in = open<std::ifstream>(path);
    return read_market(in, path.string());
}

std::vector<chr::sys_days> load_calendar(const std::filesystem::path& path) {
    auto in = open<std::ifstream>(path);
    return read_calendar(in, path.string());
}

void write_submissions(std::ostream& out, std::span<const SubmissionRecord> rows) {
    out << "submission_id,author_id,ticker,timestamp_utc,p_bull,p_bear,p_neutral\n";
    for (const auto& r : rows) {
        out << csv_field(r.submission_id) << ',' << csv_field(r.author_id) << ',' << csv_field(r.ticker)
            << ',' << r.timestamp << ',' << format_double(r.p_bull) << ',' << format_double(r.p_bear)
            << ',' << format_double(r.p_neutral) << '\n';
    }
}

void write_comments(std::ostream& out, std::span<const CommentRecord> rows) {
    out << "comment_id,author_id,submission_id,timestamp_utc\n";
    for (const auto& r : rows) {
        out << csv_field(r.comment_id) << ',' << csv_field(r.author_id) << ','
            << csv_field(r.submission_id) << ',' << r.timestamp << '\n';
    }
}

void write_market(std::ostream& out, std::span<const MarketRecord> rows) {
    out << "ticker,date,log_return,volume,market_cap\n";
    for (const auto& r : rows) {
        out << csv_field(r.ticker) << ',' << format_date(r.date) << ',' << format_double(r.log_return)
            << ',' << format_double(r.volume) << ',' << format_double(r.market_cap) << '\n';
    }
}

void write_calendar(std::ostream& out, std::span<const chr::sys_days> days) {
    out << "date\n";
    for (const auto d : days) {
        out << format_date(d) << '\n';
    }
}

std::int64_t eastern_offset(std::int64_t utc_seconds) {
    constexpr std::int64_t kStandard = -5 * 3600;
    constexpr std::int64_t kDaylight = -4 * 3600;
    const auto day = chr::sys_days(chr::days(utc_seconds >= 0 ? utc_seconds / 86400
                                                              : -((-utc_seconds + 86399) / 86400)));
    const chr::year y = chr::year_month_day(day).year();

    chr::sys_days start;
    chr::sys_days end;
    if (y >= chr::year(2007)) {
        start = chr::sys_days(y / chr::March / chr::Sunday[2]);
        end = chr::sys_days(y / chr::November / chr::Sunday[1]);
    } else {
        start = chr::sys_days(y / chr::April / chr::Sunday[1]);
        end = chr::sys_days(y / chr::October / chr::Sunday[chr::last]);
    }
    // Transitions happen at 02:00 local: 07:00 UTC in spring, 06:00 UTC in autumn.
    const std::int64_t start_utc = start.time_since_epoch().count() * 86400 + 7 * 3600;
    const std::int64_t end_utc = end.time_since_epoch().count() * 86400 + 6 * 3600;
    return (utc_seconds >= start_utc && utc_seconds < end_utc) ? kDaylight : kStandard;
}

chr::sys_days eastern_date(std::int64_t utc_seconds) {
    const std::int64_t local = utc_seconds + eastern_offset(utc_seconds);
    const std::int64_t days = local >= 0 ? local / 86400 : -((-local + 86399) / 86400);
    return chr::sys_days(chr::days(days));
}

TradingCalendar::TradingCalendar(std::vector<chr::sys_days> days) : days_(std::move(days)) {
    if (days_.empty()) {
        throw InvalidArgument("trading calendar is empty");
    }
    std::sort(days_.begin(), days_.end());
    days_.erase(std::unique(days_.begin(), days_.end()), days_.end());
}

bool TradingCalendar::contains(chr::sys_days day) const {
    return std::binary_search(days_.begin(), days_.end(), day);
}

chr::sys_days TradingCalendar::align(std::int64_t utc_seconds) const {
    const std::int64_t local = utc_seconds + eastern_offset(utc_seconds);
    const chr::sys_days date = eastern_date(utc_seconds);
    const std::int64_t seconds_of_day = local - date.time_since_epoch().count() * 86400;
    if (date < days_.front()) {
        throw InvalidArgument("timestamp " + std::to_string(utc_seconds) + " precedes the trading calendar");
    }
    const bool after_close = seconds_of_day >= 16 * 3600;
    const auto it = after_close ? std::upper_bound(days_.begin(), days_.end(), date)
                                : std::lower_bound(days_.begin(), days_.end(), date);
    if (it == days_.end()) {
        throw InvalidArgument("timestamp " + std::to_string(utc_seconds) + " is beyond the trading calendar");
    }
    return *it;
}

chr::sys_days align_to_trading_day(std::int64_t utc_seconds, const TradingCalendar& calendar) {
    return calendar.align(utc_seconds);
}

IsoWeek iso_week(chr::sys_days day) {
    const unsigned iso = chr::weekday(day).iso_encoding();  // Monday = 1
    const chr::sys_days monday = day - chr::days(iso - 1);
    const chr::sys_days thursday = monday + chr::days(3);
    const chr::year y = chr::year_month_day(thursday).year();
    const chr::sys_days jan1 = chr::sys_days(y / chr::January / 1);
    IsoWeek w;
    w.year = static_cast<int>(y);
    w.week = static_cast<unsigned>((thursday - jan1).count() / 7 + 1);
    // 1969-12-29 (index 0) is a Monday, three days before the epoch.
    w.index = (monday.time_since_epoch().count() + 3) / 7;
    return w;
}

std::string week_label(const IsoWeek& week) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-W%02u", week.year, week.week);
    return buf;
}

BotFilterResult filter_bots(std::span<const SubmissionRecord> submissions,
                            std::span<const CommentRecord> comments, std::size_t max_per_month) {
    std::map<std::pair<std::string, int>, std::size_t> counts;
    auto month_key = [](std::int64_t ts) {
        const std::int64_t d = ts >= 0 ? ts / 86400 : -((-ts + 86399) / 86400);
        const chr::year_month_day ymd{chr::sys_days(chr::days(d))};
        return static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month()));
    };
    for (const auto& s : submissions) {
        ++counts[{s.author_id, month_key(s.timestamp)}];
    }
    for (const auto& c : comments) {
        ++counts[{c.author_id, month_key(c.timestamp)}];
    }
    std::set<std::string> bots;
    for (const auto& [key, n] : counts) {
        if (n > max_per_month) {
            bots.insert(key.first);
        }
    }
    BotFilterResult out;
    for (const auto& s : submissions) {
        if (!bots.contains(s.author_id)) {
            out.submissions.push_back(s);
        }
    }
    for (const auto& c : comments) {
        if (!bots.contains(c.author_id)) {
            out.comments.push_back(c);
        }
    }
    out.removed_authors.assign(bots.begin(), bots.end());
    return out;
}

WeeklyPanel weekly_aggregate(std::span<const SubmissionRecord> submissions,
                             std::span<const MarketRecord> market,
                             std::span<const CommentRecord> comments, const AggregateOptions& options) {
    auto week_of = [&](std::int64_t ts) {
        return iso_week(options.calendar ? options.calendar->align(ts) : eastern_date(ts));
    };

    std::map<std::string, std::size_t> mentions;
    for (const auto& s : submissions) {
        ++mentions[s.ticker];
    }
    auto is_main = [&](const std::string& ticker) {
        return mentions.at(ticker) >= options.benchmark_threshold;
    };

    struct Cell {
        std::set<std::string> authors;
        double sentiment = 0.0;
        double p_bull = 0.0;
        double p_bear = 0.0;
        double p_neutral = 0.0;
        std::size_t n = 0;
    };
    struct Week {
        IsoWeek id;
        std::set<std::string> active;
        std::set<std::string> other;
    };
    std::map<std::int64_t, Week> weeks;
    std::map<std::pair<std::string, std::int64_t>, Cell> cells;

    for (const auto& s : submissions) {
        const IsoWeek w = week_of(s.timestamp);
        auto& wk = weeks[w.index];
        wk.id = w;
        wk.active.insert(s.author_id);
        if (!is_main(s.ticker)) {
            wk.other.insert(s.author_id);
            continue;
        }
        auto& c = cells[{s.ticker, w.index}];
        c.authors.insert(s.author_id);
        c.sentiment += s.p_bull - s.p_bear;
        c.p_bull += s.p_bull;
        c.p_bear += s.p_bear;
        c.p_neutral += s.p_neutral;
        ++c.n;
    }
    if (options.denominator == Denominator::AuthorsAndCommenters) {
        for (const auto& c : comments) {
            const IsoWeek w = week_of(c.timestamp);
            if (auto it = weeks.find(w.index); it != weeks.end()) {
                it->second.active.insert(c.author_id);
            }
        }
    }

    struct Market {
        std::vector<double> ret, vol, cap;
    };
    std::map<std::pair<std::string, std::int64_t>, Market> mk;
    for (const auto& m : market) {
        auto& x = mk[{m.ticker, iso_week(m.date).index}];
        x.ret.push_back(m.log_return);
        if (!std::isnan(m.volume)) {
            x.vol.push_back(m.volume);
        }
        if (!std::isnan(m.market_cap)) {
            x.cap.push_back(m.market_cap);
        }
    }

    WeeklyPanel panel;
    for (const auto& [key, c] : cells) {
        const auto& wk = weeks.at(key.second);
        const double n = static_cast<double>(c.n);
        WeeklyTickerRow row;
        row.ticker = key.first;
        row.week = week_label(wk.id);
        row.week_index = key.second;
        row.authors = static_cast<double>(c.authors.size());
        row.share = row.authors / static_cast<double>(wk.active.size());
        row.sentiment = c.sentiment / n;
        row.p_bull = c.p_bull / n;
        row.p_bear = c.p_bear / n;
        row.p_neutral = c.p_neutral / n;
        row.mean_return = row.return_variance = row.mean_volume = row.mean_market_cap = kNaN;
        if (const auto it = mk.find(key); it != mk.end()) {
            row.mean_return = mean(it->second.ret);
            row.return_variance = variance(it->second.ret);
            row.mean_volume = mean(it->second.vol);
            row.mean_market_cap = mean(it->second.cap);
        }
        row.submissions = c.n;
        panel.rows.push_back(std::move(row));
    }
    for (const auto& [index, wk] : weeks) {
        const double active = static_cast<double>(wk.active.size());
        const double other = static_cast<double>(wk.other.size());
        panel.benchmark.push_back({week_label(wk.id), index, active, other, other / active});
    }
    return panel;
}

void write_weekly(std::ostream& out, std::span<const WeeklyTickerRow> rows) {
    out << "ticker,week,week_index,authors,share,sentiment,p_bull,p_bear,p_neutral,mean_return,"
           "return_variance,mean_volume,mean_market_cap,submissions\n";
    for (const auto& r : rows) {
        out << csv_field(r.ticker) << ',' << r.week << ',' << r.week_index << ','
            << format_double(r.authors) << ',' << format_double(r.share) << ','
            << format_double(r.sentiment) << ',' << format_double(r.p_bull) << ','
            << format_double(r.p_bear) << ',' << format_double(r.p_neutral) << ','
            << format_double(r.mean_return) << ',' << format_double(r.return_variance) << ','
            << format_double(r.mean_volume) << ',' << format_double(r.mean_market_cap) << ','
            << r.submissions << '\n';
    }
}

std::vector<WeeklyTickerRow> read_weekly(std::istream& in, std::string_view source) {
    const auto table = read_csv(in, source);
    expect_header(table, {"ticker", "week", "week_index", "authors", "share", "sentiment", "p_bull",
                          "p_bear", "p_neutral", "mean_return", "return_variance", "mean_volume",
                          "mean_market_cap", "submissions"},
                  source);
    return parse_rows<WeeklyTickerRow>(table, source, [](const std::vector<std::string>& f) {
        WeeklyTickerRow r;
        r.ticker = f[0];
        r.week = f[1];
        r.week_index = parse_int(f[2]);
        r.authors = parse_double(f[3]);
        r.share = parse_double(f[4]);
        r.sentiment = parse_double(f[5], true);
        r.p_bull = parse_double(f[6], true);
        r.p_bear = parse_double(f[7], true);
        r.p_neutral = parse_double(f[8], true);
        r.mean_return = parse_double(f[9], true);
        r.return_variance = parse_double(f[10], true);
        r.mean_volume = parse_double(f[11], true);
        r.mean_market_cap = parse_double(f[12], true);
        r.submissions = static_cast<std::size_t>(parse_int(f[13]));
        if (r.share < 0.0 || r.share > 1.0) {
            throw InvalidArgument("share outside [0, 1]");
        }
        return r;
    });
}

void write_benchmark(std::ostream& out, std::span<const WeeklyBenchmark> rows) {
    out << "week,week_index,active_users,other_authors,other_share\n";
    for (const auto& r : rows) {
        out << r.week << ',' << r.week_index << ',' << format_double(r.active_users) << ','
            << format_double(r.other_authors) << ',' << format_double(r.other_share) << '\n';
    }
}

std::vector<WeeklyBenchmark> read_benchmark(std::istream& in, std::string_view source) {
    const auto table = read_csv(in, source);
    expect_header(table, {"week", "week_index", "active_users", "other_authors", "other_share"}, source);
    return parse_rows<WeeklyBenchmark>(table, source, [](const std::vector<std::string>& f) {
        return WeeklyBenchmark{f[0], parse_int(f[1]), parse_double(f[2]), parse_double(f[3]),
                               parse_double(f[4])};
    });
}

}  // namespace hypedyn::io
