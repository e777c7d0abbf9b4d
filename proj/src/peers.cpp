#include "hypedyn/peers.hpp"

#include "hypedyn/error.hpp"
#include "hypedyn/features.hpp"
#include "hypedyn/panel.hpp"
#include "hypedyn/rng.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

namespace hypedyn::econ {

namespace {

// Post indices per ticker, ordered by (time, input index).
std::map<std::string, std::vector<std::size_t>> by_ticker(std::span<const SentimentPost> posts) {
    std::map<std::string, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < posts.size(); ++i) {
        out[posts[i].ticker].push_back(i);
    }
    for (auto& [ticker, idx] : out) {
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return posts[a].time < posts[b].time; });
    }
    return out;
}

// For each post, the index of the same author's previous post on the same
// ticker (strictly earlier), or npos.
std::vector<std::size_t> prior_posts(std::span<const SentimentPost> posts,
                                     const std::map<std::string, std::vector<std::size_t>>& tickers) {
    constexpr auto npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> prior(posts.size(), npos);
    for (const auto& [ticker, idx] : tickers) {
        std::unordered_map<std::string, std::size_t> last;
        std::unordered_map<std::string, std::size_t> last_strict;
        std::int64_t current_time = 0;
        std::vector<std::pair<std::string, std::size_t>> pending;
        for (std::size_t pos = 0; pos < idx.size(); ++pos) {
            const auto& p = posts[idx[pos]];
            if (pos == 0 || p.time != current_time) {
                for (auto& [a, i] : pending) {
                    last[a] = i;
                }
                pending.clear();
                current_time = p.time;
            }
            const auto it = last.find(p.author);
            if (it != last.end()) {
                prior[idx[pos]] = it->second;
            }
            pending.emplace_back(p.author, idx[pos]);
        }
    }
    return prior;
}

void fill_peer_means(FrequentPosterRow& row, std::span<const SentimentPost> posts,
                     const std::vector<std::size_t>& prior) {
    constexpr auto npos = static_cast<std::size_t>(-1);
    double sum = 0.0;
    double inst = 0.0;
    row.peers_with_prior = 0;
    for (std::size_t k : row.peer_posts) {
        sum += posts[k].sentiment;
        if (prior[k] != npos) {
            inst += posts[prior[k]].sentiment;
            ++row.peers_with_prior;
        }
    }
    row.peer_mean = row.peer_posts.empty() ? kMissing
                                           : sum / static_cast<double>(row.peer_posts.size());
    row.instrument_mean =
        row.peers_with_prior == 0 ? kMissing : inst / static_cast<double>(row.peers_with_prior);
}

}  // namespace

std::vector<SentimentPost> to_sentiment_posts(std::span<const SubmissionRecord> submissions) {
    std::vector<SentimentPost> out;
    out.reserve(submissions.size());
    for (const auto& s : submissions) {
        int category = 0;
        if (s.p_bull > s.p_bear && s.p_bull > s.p_neutral) {
            category = 1;
        } else if (s.p_bear > s.p_bull && s.p_bear > s.p_neutral) {
            category = -1;
        }
        out.push_back({s.submission_id, s.author_id, s.ticker, s.timestamp,
                       sentiment_logodds(s.p_bull, s.p_bear, s.p_neutral), category});
    }
    return out;
}

std::vector<FrequentPosterRow> frequent_posters_dataset(std::span<const SentimentPost> posts) {
    const auto tickers = by_ticker(posts);
    const auto prior = prior_posts(posts, tickers);

    std::vector<FrequentPosterRow> out;
    for (const auto& [ticker, idx] : tickers) {
        std::map<std::string, std::vector<std::size_t>> by_author;
        for (std::size_t i : idx) {
            by_author[posts[i].author].push_back(i);
        }
        for (const auto& [author, own] : by_author) {
            for (std::size_t n = 1; n < own.size(); ++n) {
                const auto& prev = posts[own[n - 1]];
                const auto& cur = posts[own[n]];
                FrequentPosterRow row{author, ticker, prev.time, cur.time, cur.sentiment,
                                      prev.sentiment, 0.0, 0.0, {}, 0};
                for (std::size_t k : idx) {
                    const auto& p = posts[k];
                    if (p.author != author && p.time > prev.time && p.time < cur.time) {
                        row.peer_posts.push_back(k);
                    }
                }
                if (row.peer_posts.empty()) {
                    continue;
                }
                fill_peer_means(row, posts, prior);
                out.push_back(std::move(row));
            }
        }
    }
    return out;
}

std::vector<FrequentPosterRow> placebo_rewire(std::span<const FrequentPosterRow> rows,
                                              std::span<const SentimentPost> posts,
                                              std::uint64_t seed) {
    const auto tickers = by_ticker(posts);
    const auto prior = prior_posts(posts, tickers);

    std::vector<FrequentPosterRow> out(rows.begin(), rows.end());
    for (std::size_t r = 0; r < out.size(); ++r) {
        auto& row = out[r];
        std::vector<std::size_t> pool;
        if (const auto it = tickers.find(row.ticker); it != tickers.end()) {
            for (std::size_t k : it->second) {
                if (posts[k].author != row.author && posts[k].time < row.previous_time) {
                    pool.push_back(k);
                }
            }
        }
        const std::size_t want = row.peer_posts.size();
        std::vector<std::size_t> cohort;
        if (pool.size() <= want) {
            cohort = pool;
        } else {
            std::mt19937_64 rng(mix_seed(seed, {r}));
            std::sample(pool.begin(), pool.end(), std::back_inserter(cohort), want, rng);
        }
        row.peer_posts = std::move(cohort);
        fill_peer_means(row, posts, prior);
    }
    return out;
}

CommenterNetwork commenter_network_dataset(std::span<const SentimentPost> posts,
                                           std::span<const CommentRecord> comments) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < posts.size(); ++i) {
        if (!by_id.emplace(posts[i].submission_id, i).second) {
            throw InvalidArgument("duplicate submission id " + posts[i].submission_id);
        }
    }
    // author -> commented submission index -> comment count
    std::unordered_map<std::string, std::map<std::size_t, double>> commented;
    for (const auto& c : comments) {
        const auto it = by_id.find(c.submission_id);
        if (it == by_id.end()) {
            throw InvalidArgument("comment " + c.comment_id + " references unknown submission " +
                                  c.submission_id);
        }
        commented[c.author_id][it->second] += 1.0;
    }

    CommenterNetwork net;
    net.weights.resize(posts.size());
    for (std::size_t i = 0; i < posts.size(); ++i) {
        const auto& p = posts[i];
        const auto it = commented.find(p.author);
        if (it == commented.end()) {
            continue;
        }
        double total = 0.0;
        for (const auto& [j, count] : it->second) {
            const auto& q = posts[j];
            if (q.ticker == p.ticker && q.time < p.time && q.author != p.author) {
                net.weights[i].emplace_back(j, count);
                total += count;
            }
        }
        for (auto& [j, w] : net.weights[i]) {
            w /= total;
        }
    }

    const auto tickers = by_ticker(posts);
    const auto prior = prior_posts(posts, tickers);

    net.rows.reserve(posts.size());
    for (std::size_t i = 0; i < posts.size(); ++i) {
        const auto& p = posts[i];
        NetworkRow row{p.submission_id, p.author, p.ticker, p.sentiment, kMissing, kMissing, kMissing};
        if (prior[i] != static_cast<std::size_t>(-1)) {
            row.lagged_category = posts[prior[i]].category;
        }
        const auto& wi = net.weights[i];
        if (!wi.empty()) {
            double direct = 0.0;
            std::map<std::size_t, double> two_hop;
            for (const auto& [j, w] : wi) {
                direct += w * posts[j].sentiment;
                for (const auto& [k, v] : net.weights[j]) {
                    two_hop[k] += w * v;
                }
            }
            row.neighbor_mean = direct;
            double mass = 0.0;
            double acc = 0.0;
            for (const auto& [k, v] : two_hop) {
                mass += v;
                acc += v * posts[k].sentiment;
            }
            if (mass > 0.0) {
                row.two_hop_mean = acc / mass;
            }
        }
        net.rows.push_back(std::move(row));
    }
    return net;
}

}  // namespace hypedyn::econ
