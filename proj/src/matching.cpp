#include "hypedyn/matching.hpp"

#include "hypedyn/error.hpp"
#include "hypedyn/panel_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace hypedyn::match {

namespace {

double mean_external(const UserProfile& u) {
    if (u.external_posts.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto& [name, count] : u.external_posts) {
        total += count;
    }
    return total / static_cast<double>(u.external_posts.size());
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double x) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    [[nodiscard]] double normalize(double x) const { return hi > lo ? (x - lo) / (hi - lo) : 0.0; }
};

// Square O(n^3) assignment (shortest augmenting paths with potentials) minimizing total cost; returns the row
// assigned to each column.
std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const auto n = static_cast<std::size_t>(cost.rows());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                                   u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_of(n);
    for (std::size_t j = 1; j <= n; ++j) {
        row_of[j - 1] = p[j] - 1;
    }
    return row_of;
}

int month_of(std::int64_t ts) {
    const auto d = static_cast<std::int64_t>(std::floor(static_cast<double>(ts) / kSecondsPerDay));
    const std::chrono::year_month_day ymd{std::chrono::sys_days(std::chrono::days(d))};
    return static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month()));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) {
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

}  // namespace

void UserProfile::validate() const {
    detail::require(!user_id.empty(), "user id is empty");
    detail::require(first_activity <= last_activity, "first activity after last activity for " + user_id);
    detail::require(avg_text_length >= 0.0 && activity_per_month >= 0.0,
                    "negative activity statistics for " + user_id);
    detail::require(std::is_sorted(activity.begin(), activity.end()),
                    "activity times not sorted for " + user_id);
    for (const auto& [name, count] : external_posts) {
        detail::require(count >= 0.0, "negative external post count for " + user_id);
    }
}

Distances distances(const UserProfile& treated, const UserProfile& control,
                    std::span<const std::int64_t> exposures) {
    std::vector<std::int64_t> recent(exposures.begin(), exposures.end());
    std::sort(recent.begin(), recent.end(), std::greater<>());
    if (recent.size() > kMaxExposures) {
        recent.resize(kMaxExposures);
    }

    Distances d;
    for (const std::int64_t s : recent) {
        const auto next = std::upper_bound(control.activity.begin(), control.activity.end(), s);
        double days = kExposureCapDays;
        if (next != control.activity.end()) {
            days = std::min(days, static_cast<double>(*next - s) / kSecondsPerDay);
        }
        d.d1.push_back(days);
    }
    d.d2 = std::abs(treated.avg_text_length - control.avg_text_length);
    d.d3 = std::abs(treated.activity_per_month - control.activity_per_month);
    d.d4 = std::abs(static_cast<double>(treated.external_posts.size()) -
                    static_cast<double>(control.external_posts.size()));

    std::size_t common = 0;
    for (const auto& [name, count] : treated.external_posts) {
        common += control.external_posts.count(name);
    }
    const std::size_t uni = treated.external_posts.size() + control.external_posts.size() - common;
    d.d5 = uni == 0 ? 0.0 : 1.0 - static_cast<double>(common) / static_cast<double>(uni);
    d.d6 = std::abs(mean_external(treated) - mean_external(control));
    return d;
}

MatchProblem score_matrix(std::span<const UserProfile> treatment,
                          std::span<const std::vector<std::int64_t>> exposures,
                          std::span<const UserProfile> controls, const Weights& weights,
                          const Eigen::MatrixXi* allowed) {
    if (controls.empty()) {
        throw InvalidArgument("matching needs at least one control user");
    }
    detail::require(exposures.size() == treatment.size(), "one exposure list per treated user");
    const auto nt = static_cast<Eigen::Index>(treatment.size());
    const auto nc = static_cast<Eigen::Index>(controls.size());
    if (allowed) {
        detail::require(allowed->rows() == nt && allowed->cols() == nc, "mask shape mismatch");
    }
    for (double w : weights) {
        detail::require(std::isfinite(w) && w >= 0.0, "weights must be finite and >= 0");
    }

    std::vector<Distances> raw(treatment.size() * controls.size());
    std::array<Range, 6> ranges;
    auto ok = [&](Eigen::Index i, Eigen::Index j) { return !allowed || (*allowed)(i, j) != 0; };
    for (Eigen::Index i = 0; i < nt; ++i) {
        for (Eigen::Index j = 0; j < nc; ++j) {
            if (!ok(i, j)) {
                continue;
            }
            auto& d = raw[static_cast<std::size_t>(i * nc + j)];
            d = distances(treatment[static_cast<std::size_t>(i)], controls[static_cast<std::size_t>(j)],
                          exposures[static_cast<std::size_t>(i)]);
            for (double x : d.d1) {
                ranges[0].add(x);
            }
            ranges[1].add(d.d2);
            ranges[2].add(d.d3);
            ranges[3].add(d.d4);
            ranges[4].add(d.d5);
            ranges[5].add(d.d6);
        }
    }

    MatchProblem p;
    for (const auto& t : treatment) {
        p.treatment.push_back(t.user_id);
    }
    for (const auto& c : controls) {
        p.control.push_back(c.user_id);
    }
    p.score = Eigen::MatrixXd::Zero(nt, nc);
    for (Eigen::Index i = 0; i < nt; ++i) {
        for (Eigen::Index j = 0; j < nc; ++j) {
            if (!ok(i, j)) {
                continue;
            }
            const auto& d = raw[static_cast<std::size_t>(i * nc + j)];
            double total = 0.0;
            for (double x : d.d1) {
                total += weights[0] * ranges[0].normalize(x);
            }
            total += weights[1] * ranges[1].normalize(d.d2) + weights[2] * ranges[2].normalize(d.d3) +
                     weights[3] * ranges[3].normalize(d.d4) + weights[4] * ranges[4].normalize(d.d5) +
                     weights[5] * ranges[5].normalize(d.d6);
            p.score(i, j) = 1.0 / (total + kScoreEpsilon);
        }
    }
    return p;
}

MatchResult optimal_match(const Eigen::MatrixXd& score) {
    if (!score.allFinite() || (score.size() > 0 && score.minCoeff() < 0.0)) {
        throw InvalidArgument("match scores must be finite and >= 0");
    }
    MatchResult out;
    const Eigen::Index n = std::max(score.rows(), score.cols());
    if (n == 0) {
        return out;
    }
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
    cost.topLeftCorner(score.rows(), score.cols()) = -score;
    const auto row_of = min_cost_assignment(cost);
    for (std::size_t j = 0; j < row_of.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(row_of[j]);
        const auto jj = static_cast<Eigen::Index>(j);
        if (i < score.rows() && jj < score.cols() && score(i, jj) > 0.0) {
            out.pairs.emplace_back(row_of[j], j);
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    for (const auto& [i, j] : out.pairs) {
        out.total_score += score(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return out;
}

int exposure_bucket(std::size_t exposures) {
    detail::require(exposures >= 1, "a treated user has at least one exposure");
    return static_cast<int>(std::min<std::size_t>(exposures, 5));
}

Effect treatment_effect(std::span<const MatchedOutcome> outcomes) {
    if (outcomes.empty()) {
        throw InvalidArgument("treatment effect needs at least one matched pair");
    }
    Effect e;
    e.pairs = outcomes.size();
    for (const auto& o : outcomes) {
        e.pi_treated += o.treated_posted ? 1.0 : 0.0;
        e.pi_control += o.control_posted ? 1.0 : 0.0;
    }
    e.pi_treated /= static_cast<double>(e.pairs);
    e.pi_control /= static_cast<double>(e.pairs);
    e.difference = e.pi_treated - e.pi_control;
    return e;
}

std::vector<Effect> treatment_effects(std::span<const MatchedOutcome> outcomes) {
    std::map<std::pair<std::string, int>, std::vector<MatchedOutcome>> groups;
    for (const auto& o : outcomes) {
        groups[{o.ticker, 0}].push_back(o);
        groups[{o.ticker, exposure_bucket(o.exposures)}].push_back(o);
    }
    std::vector<Effect> out;
    for (const auto& [key, members] : groups) {
        Effect e = treatment_effect(members);
        e.ticker = key.first;
        e.bucket = key.second;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<MatchedPair> match_users(std::span<const UserProfile> profiles,
                                     std::span<const Exposure> exposures,
                                     std::span<const FirstPost> first_posts, const Weights& weights) {
    std::map<std::string, const UserProfile*> by_id;
    for (const auto& p : profiles) {
        p.validate();
        if (!by_id.emplace(p.user_id, &p).second) {
            throw InvalidArgument("duplicate profile " + p.user_id);
        }
    }
    std::map<std::pair<std::string, std::string>, std::int64_t> first_post;
    for (const auto& f : first_posts) {
        auto [it, fresh] = first_post.try_emplace({f.user_id, f.ticker}, f.time);
        if (!fresh) {
            it->second = std::min(it->second, f.time);
        }
    }
    // ticker -> user -> exposure times
    std::map<std::string, std::map<std::string, std::vector<std::int64_t>>> exposed;
    for (const auto& e : exposures) {
        if (!by_id.contains(e.user_id)) {
            throw InvalidArgument("exposure for unknown user " + e.user_id);
        }
        exposed[e.ticker][e.user_id].push_back(e.time);
    }

    std::vector<MatchedPair> out;
    for (auto& [ticker, users] : exposed) {
        auto posted_at = [&](const std::string& user) -> const std::int64_t* {
            const auto it = first_post.find({user, ticker});
            return it == first_post.end() ? nullptr : &it->second;
        };

        std::vector<UserProfile> treated;
        std::vector<std::vector<std::int64_t>> treated_exposures;
        std::vector<std::int64_t> anchors;
        for (auto& [user, times] : users) {
            std::sort(times.begin(), times.end());
            const std::int64_t* fp = posted_at(user);
            std::vector<std::int64_t> before;
            for (auto t : times) {
                if (!fp || t < *fp) {
                    before.push_back(t);
                }
            }
            if (before.empty()) {
                continue;
            }
            treated.push_back(*by_id.at(user));
            anchors.push_back(before.back());
            treated_exposures.push_back(std::move(before));
        }
        std::vector<UserProfile> controls;
        for (const auto& p : profiles) {
            if (!users.contains(p.user_id)) {
                controls.push_back(p);
            }
        }
        if (treated.empty() || controls.empty()) {
            continue;
        }

        Eigen::MatrixXi allowed(static_cast<Eigen::Index>(treated.size()),
                                static_cast<Eigen::Index>(controls.size()));
        for (std::size_t i = 0; i < treated.size(); ++i) {
            for (std::size_t j = 0; j < controls.size(); ++j) {
                const auto& c = controls[j];
                const std::int64_t* fp = posted_at(c.user_id);
                const bool ok = month_of(c.first_activity) == month_of(treated[i].first_activity) &&
                                c.last_activity >= anchors[i] && !(fp && *fp <= anchors[i]);
                allowed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ok ? 1 : 0;
            }
        }
        if (allowed.sum() == 0) {
            continue;
        }
        const MatchProblem problem = score_matrix(treated, treated_exposures, controls, weights, &allowed);
        const MatchResult result = optimal_match(problem);
        for (const auto& [i, j] : result.pairs) {
            const std::int64_t* tp = posted_at(treated[i].user_id);
            const std::int64_t* cp = posted_at(controls[j].user_id);
            out.push_back({ticker, treated[i].user_id, controls[j].user_id, treated_exposures[i].size(),
                           problem.score(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                           tp && *tp > anchors[i], cp && *cp > anchors[i]});
        }
    }
    return out;
}

std::vector<UserProfile> read_profiles(std::istream& in, std::string_view source) {
    const auto table = io::read_csv(in, source);
    const std::vector<std::string> want{"user_id",          "first_activity_utc", "last_activity_utc",
                                        "avg_text_length",  "activity_per_month", "external_posts",
                                        "activity_utc"};
    if (table.header != want) {
        throw InvalidArgument(std::string(source) +
                              ": header must be user_id,first_activity_utc,last_activity_utc,"
                              "avg_text_length,activity_per_month,external_posts,activity_utc");
    }
    std::vector<UserProfile> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        try {
            detail::require(f.size() == want.size(), "expected 7 fields");
            UserProfile p;
            p.user_id = f[0];
            p.first_activity = io::parse_timestamp(f[1]);
            p.last_activity = io::parse_timestamp(f[2]);
            p.avg_text_length = io::parse_double(f[3]);
            p.activity_per_month = io::parse_double(f[4]);
            for (const auto& item : split(f[5], '|')) {
                const auto colon = item.rfind(':');
                detail::require(colon != std::string::npos && colon > 0,
                                "external posts must look like name:count");
                p.external_posts[item.substr(0, colon)] += io::parse_double(item.substr(colon + 1));
            }
            for (const auto& t : split(f[6], '|')) {
                p.activity.push_back(io::parse_timestamp(t));
            }
            std::sort(p.activity.begin(), p.activity.end());
            p.validate();
            out.push_back(std::move(p));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(where(source, table.lines[r]) + e.what());
        }
    }
    return out;
}

void write_profiles(std::ostream& out, std::span<const UserProfile> profiles) {
    out << "user_id,first_activity_utc,last_activity_utc,avg_text_length,activity_per_month,"
           "external_posts,activity_utc\n";
    for (const auto& p : profiles) {
        std::string ext;
        for (const auto& [name, count] : p.external_posts) {
            ext += (ext.empty() ? "" : "|") + name + ":" + io::format_double(count);
        }
        std::string act;
        for (auto t : p.activity) {
            act += (act.empty() ? "" : "|") + std::to_string(t);
        }
        out << io::csv_field(p.user_id) << ',' << p.first_activity << ',' << p.last_activity << ','
            << io::format_double(p.avg_text_length) << ',' << io::format_double(p.activity_per_month)
            << ',' << io::csv_field(ext) << ',' << act << '\n';
    }
}

namespace {

template <typename T>
std::vector<T> read_user_events(std::istream& in, std::string_view source) {
    const auto table = io::read_csv(in, source);
    if (table.header != std::vector<std::string>{"user_id", "ticker", "timestamp_utc"}) {
        throw InvalidArgument(std::string(source) + ": header must be user_id,ticker,timestamp_utc");
    }
    std::vector<T> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        try {
            detail::require(f.size() == 3, "expected 3 fields");
            detail::require(!f[0].empty() && !f[1].empty(), "empty user or ticker");
            out.push_back(T{f[0], f[1], io::parse_timestamp(f[2])});
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(where(source, table.lines[r]) + e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<Exposure> read_exposures(std::istream& in, std::string_view source) {
    return read_user_events<Exposure>(in, source);
}

std::vector<FirstPost> read_first_posts(std::istream& in, std::string_view source) {
    return read_user_events<FirstPost>(in, source);
}

void write_pairs(std::ostream& out, std::span<const MatchedPair> pairs) {
    out << "ticker,treated,control,exposures,score,treated_posted,control_posted\n";
    for (const auto& p : pairs) {
        out << io::csv_field(p.ticker) << ',' << io::csv_field(p.treated) << ','
            << io::csv_field(p.control) << ',' << p.exposures << ',' << io::format_double(p.score) << ','
            << (p.treated_posted ? 1 : 0) << ',' << (p.control_posted ? 1 : 0) << '\n';
    }
}

void write_effects(std::ostream& out, std::span<const Effect> effects) {
    out << "ticker,bucket,pairs,pi_treated,pi_control,difference\n";
    for (const auto& e : effects) {
        out << io::csv_field(e.ticker) << ',' << e.bucket << ',' << e.pairs << ','
            << io::format_double(e.pi_treated) << ',' << io::format_double(e.pi_control) << ','
            << io::format_double(e.difference) << '\n';
    }
}

}  // namespace hypedyn::match
