#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sg/interaction_graph.hpp"
#include "sg/tweet_record.hpp"

namespace sg {

struct UserFeatures {
    std::vector<float> mean;  // element-wise mean of the user's tweet embeddings
    uint32_t tweet_count = 0;
};

// Keyed by user name and ordered, so everything derived from a walk over the
// table is deterministic.
struct UserFeatureTable {
    size_t dim = 0;
    std::map<std::string, UserFeatures> users;
};

// Single-pass running mean per author (f64 accumulation, f32 result). Users
// with zero authored tweets are absent.
UserFeatureTable pool_user_features(std::span<const TweetRecord> records);

struct IngestStats {
    size_t records = 0;
    size_t interactions = 0;        // records carrying a directed edge
    size_t self_loops_dropped = 0;  // author == target
    size_t featureless_targets = 0; // distinct users seen only as targets
};

// Consolidates the directed interactions into the signed user-user graph and
// attaches pooled features. Users appearing only as interaction targets are
// kept as nodes with zero feature vectors (counted in stats). Node ids are
// assigned in sorted name order, so the result is independent of record
// order.
InteractionGraph build_interaction_graph(std::span<const TweetRecord> records,
                                         const UserFeatureTable& features,
                                         IngestStats* stats = nullptr);

} // namespace sg
