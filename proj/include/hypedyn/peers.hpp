#pragma once

#include "hypedyn/records.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hypedyn::econ {

/// A submission reduced to what the peer-effect datasets need.
struct SentimentPost {
    std::string submission_id;
    std::string author;
    std::string ticker;
    std::int64_t time = 0;
    double sentiment = 0.0;  ///< Phi, half log-odds bull over bear
    int category = 0;        ///< most likely class: +1, 0, -1
};

/// Phi and class label from the probability triple of each submission.
std::vector<SentimentPost> to_sentiment_posts(std::span<const SubmissionRecord> submissions);

/// One consecutive same-author, same-ticker post pair with intervening peers.
struct FrequentPosterRow {
    std::string author;
    std::string ticker;
    std::int64_t previous_time = 0;
    std::int64_t time = 0;
    double sentiment = 0.0;           ///< Phi_{i,j,t}
    double previous_sentiment = 0.0;  ///< Phi_{i,j,t-1}
    double peer_mean = 0.0;           ///< mean Phi of peer posts strictly between the pair
    double instrument_mean = 0.0;     ///< mean of those peers' own prior Phi; NaN if none had one
    std::vector<std::size_t> peer_posts;  ///< indices into the input posts
    std::size_t peers_with_prior = 0;
};

std::vector<FrequentPosterRow> frequent_posters_dataset(std::span<const SentimentPost> posts);

/// Replace each row's peer cohort by an equally sized random draw (without
/// replacement) from posts by other authors on the same ticker made before
/// the row's earlier post. Smaller pools are taken whole.
std::vector<FrequentPosterRow> placebo_rewire(std::span<const FrequentPosterRow> rows,
                                              std::span<const SentimentPost> posts,
                                              std::uint64_t seed);

struct NetworkRow {
    std::string submission_id;
    std::string author;
    std::string ticker;
    double sentiment = 0.0;         ///< Phi_i
    double lagged_category = 0.0;   ///< class of the author's previous post on the ticker; NaN if none
    double neighbor_mean = 0.0;     ///< (W Phi)_i; NaN for an empty row
    double two_hop_mean = 0.0;      ///< row-normalized W^2 applied to Phi; NaN if empty
};

/// Submission adjacency built from comments: w_ij counts comments by the
/// author of i on older same-ticker submissions j by other authors,
/// normalized to row sums of 1.
struct CommenterNetwork {
    std::vector<std::vector<std::pair<std::size_t, double>>> weights;  ///< sparse rows of W
    std::vector<NetworkRow> rows;                                      ///< same order as posts
};

CommenterNetwork commenter_network_dataset(std::span<const SentimentPost> posts,
                                           std::span<const CommentRecord> comments);

}  // namespace hypedyn::econ
