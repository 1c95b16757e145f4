#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sg/interner.hpp"

namespace sg {

struct RawInteraction {
    uint32_t author;
    uint32_t target;
    double sentiment;  // in [-1, +1]
};

struct ConsolidatedEdge {
    uint32_t src;
    uint32_t dst;
    double weight;  // mean sentiment across the pair's interactions
};

// Collapse per-tweet directed interactions into one edge per ordered pair,
// weight = arithmetic mean of the constituent sentiments (compensated sum).
// Self-loops in the raw data are dropped. Sentiments outside [-1, +1] raise a
// validation error naming the record index.
std::vector<ConsolidatedEdge> consolidate_interactions(std::span<const RawInteraction> raw,
                                                       size_t* self_loops_dropped = nullptr);

// Signed, weighted, attributed user-user directed graph: consolidated edges,
// node feature matrix X (row-major, f32), per-node tweet counts. Immutable
// after construction.
class InteractionGraph {
public:
    InteractionGraph(Interner users, std::vector<ConsolidatedEdge> edges, std::vector<float> features,
                     size_t feature_dim, std::vector<uint32_t> tweet_counts);

    size_t node_count() const { return users_.size(); }
    size_t edge_count() const { return dst_.size(); }
    size_t feature_dim() const { return dim_; }

    std::span<const uint32_t> out_neighbors(uint32_t v) const {
        return {dst_.data() + off_[v], dst_.data() + off_[v + 1]};
    }
    std::span<const double> out_weights(uint32_t v) const {
        return {w_.data() + off_[v], w_.data() + off_[v + 1]};
    }
    std::span<const float> feature_row(uint32_t v) const {
        return {features_.data() + size_t(v) * dim_, dim_};
    }
    const std::vector<float>& features() const { return features_; }
    uint32_t tweet_count(uint32_t v) const { return tweet_counts_[v]; }
    const std::vector<uint32_t>& tweet_counts() const { return tweet_counts_; }

    const Interner& users() const { return users_; }

    // Edge list in (src, dst) order (snapshot writing, tests).
    std::vector<ConsolidatedEdge> edge_list() const;

private:
    Interner users_;
    std::vector<uint64_t> off_;
    std::vector<uint32_t> dst_;
    std::vector<double> w_;
    std::vector<float> features_;
    size_t dim_ = 0;
    std::vector<uint32_t> tweet_counts_;
};

} // namespace sg
