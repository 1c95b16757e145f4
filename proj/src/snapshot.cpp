#include "sg/snapshot.hpp"

#include <fstream>

#include "sg/binary_io.hpp"
#include "sg/errors.hpp"

namespace sg {

namespace {

constexpr char kMagic[5] = "SGR1";

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "' for reading");
    return is;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
    return os;
}

void put_interner(std::ostream& os, const Interner& in) {
    bin::put_u32(os, uint32_t(in.size()));
    for (const std::string& s : in.names()) bin::put_str(os, s);
}

Interner get_interner(std::istream& is) {
    uint32_t n = bin::get_u32(is);
    Interner out;
    for (uint32_t i = 0; i < n; ++i) {
        std::string s = bin::get_str(is);
        if (out.intern(s) != i) throw DataError("snapshot: duplicate interned name '" + s + "'");
    }
    return out;
}

} // namespace

void write_snapshot(const std::string& path, const BipartiteGraph& g) {
    std::ofstream os = open_out(path);
    bin::put_magic(os, kMagic);
    bin::put_u8(os, uint8_t(SnapshotKind::bipartite));
    put_interner(os, g.users());
    put_interner(os, g.hashtags());
    bin::put_u64(os, g.edge_count());
    for (uint32_t u = 0; u < g.user_count(); ++u)
        for (const BipartiteGraph::Incident& inc : g.hashtags_of(u)) {
            bin::put_u32(os, u);
            bin::put_u32(os, inc.id);
            bin::put_u32(os, inc.weight);
        }
    os.flush();
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

void write_snapshot(const std::string& path, const InteractionGraph& g) {
    std::ofstream os = open_out(path);
    bin::put_magic(os, kMagic);
    bin::put_u8(os, uint8_t(SnapshotKind::interaction));
    put_interner(os, g.users());
    bin::put_u32(os, uint32_t(g.feature_dim()));
    bin::put_u64(os, g.edge_count());
    for (uint32_t v = 0; v < g.node_count(); ++v) {
        auto nbr = g.out_neighbors(v);
        auto w = g.out_weights(v);
        for (size_t i = 0; i < nbr.size(); ++i) {
            bin::put_u32(os, v);
            bin::put_u32(os, nbr[i]);
            bin::put_f64(os, w[i]);
        }
    }
    for (float x : g.features()) bin::put_f32(os, x);
    for (uint32_t c : g.tweet_counts()) bin::put_u32(os, c);
    os.flush();
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

SnapshotKind peek_snapshot_kind(const std::string& path) {
    std::ifstream is = open_in(path);
    bin::expect_magic(is, kMagic, path);
    uint8_t kind = bin::get_u8(is);
    if (kind > uint8_t(SnapshotKind::interaction))
        throw DataError(path + ": unknown snapshot kind byte " + std::to_string(kind));
    return SnapshotKind(kind);
}

BipartiteGraph read_bipartite_snapshot(const std::string& path) {
    std::ifstream is = open_in(path);
    bin::expect_magic(is, kMagic, path);
    if (bin::get_u8(is) != uint8_t(SnapshotKind::bipartite))
        throw DataError(path + ": not a bipartite graph snapshot");
    Interner users = get_interner(is);
    Interner tags = get_interner(is);
    uint64_t m = bin::get_u64(is);
    std::vector<BipartiteEdge> edges;
    edges.reserve(m);
    for (uint64_t i = 0; i < m; ++i) {
        BipartiteEdge e;
        e.user = bin::get_u32(is);
        e.hashtag = bin::get_u32(is);
        e.weight = bin::get_u32(is);
        edges.push_back(e);
    }
    return BipartiteGraph::from_edges(std::move(users), std::move(tags), std::move(edges));
}

InteractionGraph read_interaction_snapshot(const std::string& path) {
    std::ifstream is = open_in(path);
    bin::expect_magic(is, kMagic, path);
    if (bin::get_u8(is) != uint8_t(SnapshotKind::interaction))
        throw DataError(path + ": not an interaction graph snapshot");
    Interner users = get_interner(is);
    size_t n = users.size();
    uint32_t dim = bin::get_u32(is);
    uint64_t m = bin::get_u64(is);
    std::vector<ConsolidatedEdge> edges;
    edges.reserve(m);
    for (uint64_t i = 0; i < m; ++i) {
        ConsolidatedEdge e;
        e.src = bin::get_u32(is);
        e.dst = bin::get_u32(is);
        e.weight = bin::get_f64(is);
        edges.push_back(e);
    }
    std::vector<float> x(n * size_t(dim));
    for (float& v : x) v = bin::get_f32(is);
    std::vector<uint32_t> counts(n);
    for (uint32_t& c : counts) c = bin::get_u32(is);
    return InteractionGraph(std::move(users), std::move(edges), std::move(x), dim, std::move(counts));
}

} // namespace sg
