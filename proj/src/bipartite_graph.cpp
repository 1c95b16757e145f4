#include "sg/bipartite_graph.hpp"

#include <algorithm>
#include <unordered_map>

#include "sg/errors.hpp"
#include "sg/util.hpp"

namespace sg {

BipartiteGraph BipartiteGraph::from_posts(std::span<const PostRecord> posts) {
    if (posts.empty()) throw DataError("build_bipartite: empty input, refusing to build an empty graph");

    Interner users, hashtags;
    std::unordered_map<uint64_t, uint32_t> counts;  // (user<<32 | hashtag) -> weight
    for (size_t i = 0; i < posts.size(); ++i) {
        const PostRecord& p = posts[i];
        if (p.user.empty())
            throw DataError("build_bipartite: record " + std::to_string(i) + ": empty user id");
        uint32_t u = users.intern(p.user);
        for (const std::string& raw : p.hashtags) {
            std::string tag = normalize_hashtag(raw);
            if (tag.empty())
                throw DataError("build_bipartite: record " + std::to_string(i) + ": empty hashtag");
            uint32_t h = hashtags.intern(tag);
            counts[(uint64_t(u) << 32) | h] += 1;
        }
    }
    if (counts.empty()) throw DataError("build_bipartite: input contains no hashtag usages");

    std::vector<BipartiteEdge> edges;
    edges.reserve(counts.size());
    for (const auto& [key, w] : counts)
        edges.push_back({uint32_t(key >> 32), uint32_t(key & 0xffffffffu), w});
    return from_edges(std::move(users), std::move(hashtags), std::move(edges));
}

BipartiteGraph BipartiteGraph::from_edges(Interner users, Interner hashtags, std::vector<BipartiteEdge> edges) {
    BipartiteGraph g;
    g.users_ = std::move(users);
    g.hashtags_ = std::move(hashtags);
    for (const BipartiteEdge& e : edges) {
        if (e.user >= g.users_.size() || e.hashtag >= g.hashtags_.size())
            throw DataError("bipartite edge references unknown node id");
        if (e.weight == 0) throw DataError("bipartite edge weight must be >= 1");
    }
    g.build_from_sorted_edges(std::move(edges));
    return g;
}

void BipartiteGraph::build_from_sorted_edges(std::vector<BipartiteEdge>&& edges) {
    std::sort(edges.begin(), edges.end(), [](const BipartiteEdge& a, const BipartiteEdge& b) {
        return a.user != b.user ? a.user < b.user : a.hashtag < b.hashtag;
    });
    for (size_t i = 1; i < edges.size(); ++i)
        if (edges[i].user == edges[i - 1].user && edges[i].hashtag == edges[i - 1].hashtag)
            throw DataError("duplicate bipartite edge (" + users_.name(edges[i].user) + ", " +
                            hashtags_.name(edges[i].hashtag) + ")");

    size_t nu = users_.size(), nh = hashtags_.size();
    user_off_.assign(nu + 1, 0);
    tag_off_.assign(nh + 1, 0);
    for (const BipartiteEdge& e : edges) {
        ++user_off_[e.user + 1];
        ++tag_off_[e.hashtag + 1];
        total_weight_ += e.weight;
    }
    for (size_t i = 0; i < nu; ++i) user_off_[i + 1] += user_off_[i];
    for (size_t i = 0; i < nh; ++i) tag_off_[i + 1] += tag_off_[i];

    user_inc_.resize(edges.size());
    tag_inc_.resize(edges.size());
    std::vector<uint64_t> tag_cursor(tag_off_.begin(), tag_off_.end() - 1);
    size_t pos = 0;
    for (const BipartiteEdge& e : edges) {
        user_inc_[pos++] = {e.hashtag, e.weight};
        tag_inc_[tag_cursor[e.hashtag]++] = {e.user, e.weight};
    }
    // edges sorted by (user, hashtag): the user view is ordered; the hashtag
    // view comes out ordered by user within each hashtag.
}

bool BipartiteGraph::mirrors_consistent() const {
    if (user_inc_.size() != tag_inc_.size()) return false;
    std::vector<std::tuple<uint32_t, uint32_t, uint32_t>> a, b;
    a.reserve(user_inc_.size());
    b.reserve(tag_inc_.size());
    for (uint32_t u = 0; u < user_count(); ++u)
        for (const Incident& inc : hashtags_of(u)) a.emplace_back(u, inc.id, inc.weight);
    for (uint32_t h = 0; h < hashtag_count(); ++h)
        for (const Incident& inc : users_of(h)) b.emplace_back(inc.id, h, inc.weight);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

} // namespace sg
