#include "sg/embed_ingest.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "sg/errors.hpp"

namespace sg {

UserFeatureTable pool_user_features(std::span<const TweetRecord> records) {
    UserFeatureTable table;
    if (records.empty()) return table;
    table.dim = records.front().embedding.size();
    if (table.dim == 0)
        throw DataError("tweet '" + records.front().tweet_id + "': empty embedding");

    struct Acc {
        std::vector<double> mean;
        uint32_t n = 0;
    };
    std::unordered_map<std::string, Acc> acc;
    acc.reserve(records.size() / 4 + 1);
    for (const TweetRecord& r : records) {
        r.validate(table.dim);
        Acc& a = acc[r.author_id];
        if (a.n == 0) a.mean.assign(table.dim, 0.0);
        a.n += 1;
        double inv = 1.0 / double(a.n);
        for (size_t i = 0; i < table.dim; ++i)
            a.mean[i] += (double(r.embedding[i]) - a.mean[i]) * inv;
    }

    for (auto& [user, a] : acc) {
        UserFeatures f;
        f.tweet_count = a.n;
        f.mean.resize(table.dim);
        for (size_t i = 0; i < table.dim; ++i) f.mean[i] = float(a.mean[i]);
        table.users.emplace(user, std::move(f));
    }
    return table;
}

InteractionGraph build_interaction_graph(std::span<const TweetRecord> records,
                                         const UserFeatureTable& features,
                                         IngestStats* stats) {
    IngestStats local;
    local.records = records.size();

    for (const TweetRecord& r : records)
        if (!features.users.count(r.author_id))
            throw DataError("tweet '" + r.tweet_id + "': author '" + r.author_id +
                            "' has no feature row");

    // Node set: every pooled user plus every interaction target. Sorted order
    // keeps id assignment independent of record order.
    std::vector<std::string> names;
    names.reserve(features.users.size());
    for (const auto& [user, f] : features.users) names.push_back(user);
    std::unordered_set<std::string> known(names.begin(), names.end());
    std::vector<std::string> extra;
    for (const TweetRecord& r : records)
        if (r.is_interaction() && known.insert(r.target_id).second) extra.push_back(r.target_id);
    std::sort(extra.begin(), extra.end());
    local.featureless_targets = extra.size();
    names.insert(names.end(), extra.begin(), extra.end());
    std::sort(names.begin(), names.end());

    Interner users;
    for (const std::string& n : names) users.intern(n);

    std::vector<RawInteraction> raw;
    for (const TweetRecord& r : records) {
        if (!r.is_interaction()) continue;
        ++local.interactions;
        raw.push_back({*users.lookup(r.author_id), *users.lookup(r.target_id), r.sentiment});
    }
    std::vector<ConsolidatedEdge> edges = consolidate_interactions(raw, &local.self_loops_dropped);

    size_t n = users.size();
    std::vector<float> x(n * features.dim, 0.0f);
    std::vector<uint32_t> counts(n, 0);
    for (const auto& [user, f] : features.users) {
        uint32_t id = *users.lookup(user);
        std::copy(f.mean.begin(), f.mean.end(), x.begin() + size_t(id) * features.dim);
        counts[id] = f.tweet_count;
    }

    if (stats) *stats = local;
    return InteractionGraph(std::move(users), std::move(edges), std::move(x), features.dim,
                            std::move(counts));
}

} // namespace sg
