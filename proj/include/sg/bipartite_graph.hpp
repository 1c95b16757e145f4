#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sg/interner.hpp"

namespace sg {

// One author's hashtag usage, possibly spanning several posts. Hashtag strings
// are raw (leading '#' and mixed case allowed); normalization happens at
// graph construction.
struct PostRecord {
    std::string user;
    std::vector<std::string> hashtags;
};

struct BipartiteEdge {
    uint32_t user;
    uint32_t hashtag;
    uint32_t weight;
};

// Weighted user-hashtag incidence structure with mirrored compressed lists.
// Immutable after construction; concurrent readers need no synchronization.
class BipartiteGraph {
public:
    struct Incident {
        uint32_t id;      // hashtag id in the user view, user id in the hashtag view
        uint32_t weight;  // posting count, >= 1
    };

    // Counts each normalized hashtag per user across all posts.
    static BipartiteGraph from_posts(std::span<const PostRecord> posts);

    // Direct construction from deduplicated edges (snapshot load, generators).
    static BipartiteGraph from_edges(Interner users, Interner hashtags, std::vector<BipartiteEdge> edges);

    size_t user_count() const { return user_off_.empty() ? 0 : user_off_.size() - 1; }
    size_t hashtag_count() const { return tag_off_.empty() ? 0 : tag_off_.size() - 1; }
    size_t edge_count() const { return user_inc_.size(); }
    uint64_t total_weight() const { return total_weight_; }

    std::span<const Incident> hashtags_of(uint32_t user) const {
        return {user_inc_.data() + user_off_[user], user_inc_.data() + user_off_[user + 1]};
    }
    std::span<const Incident> users_of(uint32_t hashtag) const {
        return {tag_inc_.data() + tag_off_[hashtag], tag_inc_.data() + tag_off_[hashtag + 1]};
    }

    const Interner& users() const { return users_; }
    const Interner& hashtags() const { return hashtags_; }

    // Round-trip check of the mirrored incidence lists (test hook).
    bool mirrors_consistent() const;

private:
    BipartiteGraph() = default;
    void build_from_sorted_edges(std::vector<BipartiteEdge>&& edges);

    Interner users_;
    Interner hashtags_;
    std::vector<uint64_t> user_off_;
    std::vector<Incident> user_inc_;
    std::vector<uint64_t> tag_off_;
    std::vector<Incident> tag_inc_;
    uint64_t total_weight_ = 0;
};

} // namespace sg
