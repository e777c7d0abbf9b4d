#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypedyn::match {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kExposureCapDays = 30.0;
inline constexpr std::size_t kMaxExposures = 5;
inline constexpr double kScoreEpsilon = 1e-9;

struct UserProfile {
    std::string user_id;
    std::int64_t first_activity = 0;  ///< UTC seconds
    std::int64_t last_activity = 0;
    double avg_text_length = 0.0;     ///< mean characters per comment or submission
    double activity_per_month = 0.0;  ///< mean comments plus submissions per month
    std::map<std::string, double> external_posts;  ///< subreddit -> post count
    std::vector<std::int64_t> activity;            ///< sorted activity times

    void validate() const;
};

/// Raw (unnormalized) distance components between a treated and a control user.
struct Distances {
    std::vector<double> d1;  ///< days to the control's next activity, one per exposure, capped at 30
    double d2 = 0.0;         ///< text length
    double d3 = 0.0;         ///< activity rate
    double d4 = 0.0;         ///< number of external subreddits
    double d5 = 0.0;         ///< 1 - Jaccard overlap of external subreddits
    double d6 = 0.0;         ///< mean posts per external subreddit
};

/// Only the five most recent exposures contribute a D1 term.
Distances distances(const UserProfile& treated, const UserProfile& control,
                    std::span<const std::int64_t> exposures);

struct MatchProblem {
    std::vector<std::string> treatment;
    std::vector<std::string> control;
    Eigen::MatrixXd score;  ///< treatment x control; 0 marks a forbidden pair
};

/// Component weights for D1..D6.
using Weights = std::array<double, 6>;
inline constexpr Weights kUnitWeights{1, 1, 1, 1, 1, 1};

/// Min-max normalizes each component over every permitted (treated, control) pair of
/// the problem (zero range gives 0), sums the weighted components into D and
/// scores M = 1 / (D + 1e-9). `allowed(i, j)`, when given, forbids pairs
/// with a zero entry.
MatchProblem score_matrix(std::span<const UserProfile> treatment,
                          std::span<const std::vector<std::int64_t>> exposures,
                          std::span<const UserProfile> controls, const Weights& weights = kUnitWeights,
                          const Eigen::MatrixXi* allowed = nullptr);

struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< (treatment row, control column)
    double total_score = 0.0;
};

/// Maximum-weight matching; each user appears at most once. Solved as a
/// square assignment padded with zero-score dummies. Pairs with zero score
/// are never reported.
MatchResult optimal_match(const Eigen::MatrixXd& score);
inline MatchResult optimal_match(const MatchProblem& p) { return optimal_match(p.score); }

/// 1, 2, 3, 4 or 5 (five or more exposures).
int exposure_bucket(std::size_t exposures);

struct MatchedOutcome {
    std::string ticker;
    std::size_t exposures = 1;
    bool treated_posted = false;
    bool control_posted = false;
};

struct Effect {
    std::string ticker;   ///< empty for the pooled estimate
    int bucket = 0;       ///< 0 pools all exposure counts
    std::size_t pairs = 0;
    double pi_treated = 0.0;
    double pi_control = 0.0;
    double difference = 0.0;
};

/// Pooled proportions and their difference. Throws without pairs.
Effect treatment_effect(std::span<const MatchedOutcome> outcomes);

/// One entry per ticker (bucket 0) and per ticker and exposure bucket.
std::vector<Effect> treatment_effects(std::span<const MatchedOutcome> outcomes);

// Plumbing for the matching pipeline.

struct Exposure {
    std::string user_id;
    std::string ticker;
    std::int64_t time = 0;  ///< when the user commented on a submission about the ticker
};

struct FirstPost {
    std::string user_id;
    std::string ticker;
    std::int64_t time = 0;  ///< the user's first submission about the ticker
};

struct MatchedPair {
    std::string ticker;
    std::string treated;
    std::string control;
    std::size_t exposures = 0;
    double score = 0.0;
    bool treated_posted = false;
    bool control_posted = false;
};

/// Per ticker: treated users are commenters who had not yet posted about the
/// ticker at their first exposure (later exposures before their first post
/// count). Eligible controls never commented on the ticker, became active
/// in the same UTC month as the treated user, were still active at the
/// treated user's latest exposure and had not posted about the ticker by
/// then. Outcomes: whether each user posted about the ticker after that time.
std::vector<MatchedPair> match_users(std::span<const UserProfile> profiles,
                                     std::span<const Exposure> exposures,
                                     std::span<const FirstPost> first_posts,
                                     const Weights& weights = kUnitWeights);

std::vector<UserProfile> read_profiles(std::istream& in, std::string_view source = "<input>");
void write_profiles(std::ostream& out, std::span<const UserProfile> profiles);
std::vector<Exposure> read_exposures(std::istream& in, std::string_view source = "<input>");
std::vector<FirstPost> read_first_posts(std::istream& in, std::string_view source = "<input>");
void write_pairs(std::ostream& out, std::span<const MatchedPair> pairs);
void write_effects(std::ostream& out, std::span<const Effect> effects);

}  // namespace hypedyn::match
