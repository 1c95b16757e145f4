#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sg/bipartite_graph.hpp"
#include "sg/stance.hpp"

namespace sg {

enum class TiePolicy : uint8_t { unlabeled = 0, prefer_s1 = 1, prefer_s2 = 2 };
enum class StdevEstimator : uint8_t { population = 0, sample = 1 };

struct PropagationConfig {
    std::vector<std::string> seeds_s1;  // raw hashtag spellings, normalized at resolution
    std::vector<std::string> seeds_s2;
    uint32_t max_iterations = 50;
    double stdev_multiplier = 1.0;  // k in the mu +- k*sigma thresholds
    TiePolicy tie_policy = TiePolicy::unlabeled;
    StdevEstimator stdev_estimator = StdevEstimator::population;
    // The score is built to be high where second-stance users dominate, so by
    // default scores above the upper threshold map to s2. This switch flips the
    // orientation (high -> s1) for compatibility experiments.
    bool high_scores_to_s1 = false;
    StancePair stances;

    void validate() const;
};

struct HashtagScore {
    uint32_t hashtag;
    double raw;         // normalized-usage difference, s2 minus s1
    double normalized;  // min-max normalized into [0, 1]
};

// Scores for every hashtag used by at least one labeled user, ascending id.
struct HashtagScoreTable {
    std::vector<HashtagScore> scores;
    double mean = 0.0;
    double stdev = 0.0;
    bool degenerate = false;  // all raw scores identical: no thresholds applicable
};

// Step A: weighted-majority transfer of hashtag labels to adjacent users.
// Users adjacent to no labeled hashtag are absent; exact ties follow
// cfg.tie_policy (default: no label).
StanceAssignment propagate_tags_to_users(const BipartiteGraph& g, const StanceAssignment& hashtags,
                                         const PropagationConfig& cfg, uint32_t iteration = 1);

// Per-hashtag usage scoring from labeled users: +1 per labeled user per
// incident edge, normalized by stance-group size, then min-max normalized.
// Both stance groups must be non-empty.
HashtagScoreTable score_hashtags(const BipartiteGraph& g, const StanceAssignment& users,
                                 const PropagationConfig& cfg);

// Step B: threshold hashtag scores at mean +- k*stdev; seed hashtags keep
// their seed label regardless of score. degenerate_warning (optional) is set
// when all scores coincide and no new label can be assigned.
StanceAssignment propagate_users_to_tags(const BipartiteGraph& g, const StanceAssignment& users,
                                         const PropagationConfig& cfg, uint32_t iteration = 1,
                                         bool* degenerate_warning = nullptr);

// Seed hashtags resolved against the graph (provenance seed, iteration 0).
// Missing seeds are reported through `missing`; a stance losing all of its
// seeds is a configuration error.
StanceAssignment resolve_seeds(const BipartiteGraph& g, const PropagationConfig& cfg,
                               std::vector<std::string>* missing = nullptr);

struct PropagationResult {
    StanceAssignment users;
    StanceAssignment hashtags;
    uint32_t iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

// Alternates the two propagation steps until the labeled user set (membership
// and labels) repeats or max_iterations is hit. Non-convergence is reported,
// not raised.
PropagationResult run_propagation(const BipartiteGraph& g, const PropagationConfig& cfg);

} // namespace sg
