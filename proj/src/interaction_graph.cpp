#include "sg/interaction_graph.hpp"

#include <algorithm>
#include <cmath>

#include "sg/errors.hpp"
#include "sg/util.hpp"

namespace sg {

std::vector<ConsolidatedEdge> consolidate_interactions(std::span<const RawInteraction> raw,
                                                       size_t* self_loops_dropped) {
    struct Item {
        uint64_t key;
        double sentiment;
    };
    std::vector<Item> items;
    items.reserve(raw.size());
    size_t dropped = 0;
    for (size_t i = 0; i < raw.size(); ++i) {
        const RawInteraction& r = raw[i];
        if (!(r.sentiment >= -1.0 && r.sentiment <= 1.0))
            throw DataError("consolidate_interactions: record " + std::to_string(i) +
                            ": sentiment " + format_double(r.sentiment) + " outside [-1, +1]");
        if (r.author == r.target) {
            ++dropped;
            continue;
        }
        items.push_back({(uint64_t(r.author) << 32) | r.target, r.sentiment});
    }
    if (self_loops_dropped) *self_loops_dropped = dropped;

    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.key < b.key; });

    std::vector<ConsolidatedEdge> edges;
    size_t i = 0;
    while (i < items.size()) {
        size_t j = i;
        KahanSum sum;
        while (j < items.size() && items[j].key == items[i].key) {
            sum.add(items[j].sentiment);
            ++j;
        }
        edges.push_back({uint32_t(items[i].key >> 32), uint32_t(items[i].key & 0xffffffffu),
                         sum.value() / double(j - i)});
        i = j;
    }
    return edges;
}

InteractionGraph::InteractionGraph(Interner users, std::vector<ConsolidatedEdge> edges,
                                   std::vector<float> features, size_t feature_dim,
                                   std::vector<uint32_t> tweet_counts)
    : users_(std::move(users)), features_(std::move(features)), dim_(feature_dim),
      tweet_counts_(std::move(tweet_counts)) {
    size_t n = users_.size();
    if (features_.size() != n * dim_)
        throw DataError("interaction graph: feature matrix size mismatch (" +
                        std::to_string(features_.size()) + " != " + std::to_string(n * dim_) + ")");
    if (tweet_counts_.size() != n)
        throw DataError("interaction graph: tweet count vector size mismatch");
    for (size_t i = 0; i < features_.size(); ++i)
        if (!std::isfinite(features_[i]))
            throw DataError("interaction graph: non-finite feature at node " +
                            std::to_string(i / (dim_ ? dim_ : 1)));

    std::sort(edges.begin(), edges.end(), [](const ConsolidatedEdge& a, const ConsolidatedEdge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    off_.assign(n + 1, 0);
    dst_.reserve(edges.size());
    w_.reserve(edges.size());
    for (size_t i = 0; i < edges.size(); ++i) {
        const ConsolidatedEdge& e = edges[i];
        if (e.src >= n || e.dst >= n) throw DataError("interaction edge references unknown node id");
        if (e.src == e.dst) throw DataError("interaction graph: self-loop after consolidation");
        if (!(e.weight >= -1.0 && e.weight <= 1.0))
            throw DataError("interaction edge weight outside [-1, +1]");
        if (i > 0 && e.src == edges[i - 1].src && e.dst == edges[i - 1].dst)
            throw DataError("duplicate consolidated edge (" + users_.name(e.src) + ", " +
                            users_.name(e.dst) + ")");
        ++off_[e.src + 1];
        dst_.push_back(e.dst);
        w_.push_back(e.weight);
    }
    for (size_t i = 0; i < n; ++i) off_[i + 1] += off_[i];
}

std::vector<ConsolidatedEdge> InteractionGraph::edge_list() const {
    std::vector<ConsolidatedEdge> out;
    out.reserve(edge_count());
    for (uint32_t v = 0; v < node_count(); ++v) {
        auto nb = out_neighbors(v);
        auto ws = out_weights(v);
        for (size_t i = 0; i < nb.size(); ++i) out.push_back({v, nb[i], ws[i]});
    }
    return out;
}

} // namespace sg
