#include "sg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace sg {

namespace {

NeighborhoodCsr build(size_t n, std::vector<std::pair<uint32_t, uint32_t>>&& dir,
                      const std::unordered_map<uint64_t, double>* pair_weight) {
    for (uint32_t v = 0; v < n; ++v) dir.emplace_back(v, v);
    std::sort(dir.begin(), dir.end());
    dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

    NeighborhoodCsr nb;
    nb.n = n;
    nb.off.assign(n + 1, 0);
    for (const auto& [v, u] : dir) nb.off[v + 1]++;
    for (size_t v = 0; v < n; ++v) nb.off[v + 1] += nb.off[v];
    nb.idx.reserve(dir.size());
    nb.coef.assign(dir.size(), 0.0);
    for (const auto& [v, u] : dir) nb.idx.push_back(u);  // already (v,u)-sorted

    for (uint32_t v = 0; v < n; ++v) {
        size_t lo = nb.off[v], hi = nb.off[v + 1];
        if (!pair_weight) {
            double c = 1.0 / double(hi - lo);
            for (size_t k = lo; k < hi; ++k) nb.coef[k] = c;
        } else {
            double total = 0.0;
            for (size_t k = lo; k < hi; ++k) {
                uint32_t u = nb.idx[k];
                double w;
                if (u == v) {
                    w = 1.0;  // self-loop weight
                } else {
                    uint64_t key = uint64_t(std::min(v, u)) << 32 | uint64_t(std::max(v, u));
                    w = pair_weight->at(key);
                }
                nb.coef[k] = w;
                total += w;
            }
            for (size_t k = lo; k < hi; ++k) nb.coef[k] /= total;
        }
    }
    return nb;
}

} // namespace

NeighborhoodCsr NeighborhoodCsr::from_graph(const InteractionGraph& g, bool sentiment_weighted) {
    size_t n = g.node_count();
    std::vector<std::pair<uint32_t, uint32_t>> dir;
    dir.reserve(2 * g.edge_count() + n);
    std::unordered_map<uint64_t, double> sum;
    std::unordered_map<uint64_t, uint32_t> cnt;
    for (uint32_t v = 0; v < n; ++v) {
        auto nbr = g.out_neighbors(v);
        auto w = g.out_weights(v);
        for (size_t i = 0; i < nbr.size(); ++i) {
            uint32_t u = nbr[i];
            dir.emplace_back(v, u);
            dir.emplace_back(u, v);
            if (sentiment_weighted) {
                uint64_t key = uint64_t(std::min(v, u)) << 32 | uint64_t(std::max(v, u));
                sum[key] += std::fabs(w[i]);
                cnt[key] += 1;
            }
        }
    }
    if (!sentiment_weighted) return build(n, std::move(dir), nullptr);
    std::unordered_map<uint64_t, double> mean;
    mean.reserve(sum.size());
    for (const auto& [key, s] : sum) mean[key] = s / double(cnt[key]);
    return build(n, std::move(dir), &mean);
}

NeighborhoodCsr NeighborhoodCsr::from_undirected(size_t n,
                                                 std::span<const std::pair<uint32_t, uint32_t>> edges) {
    std::vector<std::pair<uint32_t, uint32_t>> dir;
    dir.reserve(2 * edges.size() + n);
    for (const auto& [a, b] : edges) {
        if (a >= n || b >= n) throw DataError("neighborhood: edge endpoint out of range");
        if (a == b) continue;  // self-loops are implicit
        dir.emplace_back(a, b);
        dir.emplace_back(b, a);
    }
    return build(n, std::move(dir), nullptr);
}

} // namespace sg
