#include "sg/label_prop.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "sg/errors.hpp"
#include "sg/util.hpp"

namespace sg {

void PropagationConfig::validate() const {
    if (seeds_s1.empty() || seeds_s2.empty())
        throw ConfigError("propagation: both stances need at least one seed hashtag");
    if (max_iterations < 1) throw ConfigError("propagation: max iterations must be >= 1");
    if (!(stdev_multiplier > 0.0)) throw ConfigError("propagation: stdev multiplier k must be > 0");
    std::unordered_set<std::string> s1;
    for (const std::string& s : seeds_s1) s1.insert(normalize_hashtag(s));
    for (const std::string& s : seeds_s2)
        if (s1.count(normalize_hashtag(s)))
            throw ConfigError("propagation: seed hashtag '" + normalize_hashtag(s) +
                              "' appears in both stance sets");
}

StanceAssignment resolve_seeds(const BipartiteGraph& g, const PropagationConfig& cfg,
                               std::vector<std::string>* missing) {
    StanceAssignment seeds;
    size_t kept_s1 = 0, kept_s2 = 0;
    auto resolve = [&](const std::vector<std::string>& list, StanceId s, size_t& kept) {
        for (const std::string& raw : list) {
            std::string tag = normalize_hashtag(raw);
            if (auto id = g.hashtags().lookup(tag)) {
                seeds.assign(*id, s, Provenance::seed, 0);
                ++kept;
            } else if (missing) {
                missing->push_back(tag);
            }
        }
    };
    resolve(cfg.seeds_s1, StanceId::s1, kept_s1);
    resolve(cfg.seeds_s2, StanceId::s2, kept_s2);
    if (kept_s1 == 0 || kept_s2 == 0)
        throw ConfigError("propagation: no seed hashtag of stance '" +
                          (kept_s1 == 0 ? cfg.stances.name_s1 : cfg.stances.name_s2) +
                          "' is present in the graph");
    return seeds;
}

StanceAssignment propagate_tags_to_users(const BipartiteGraph& g, const StanceAssignment& hashtags,
                                         const PropagationConfig& cfg, uint32_t iteration) {
    if (hashtags.empty()) throw DataError("propagate_tags_to_users: no labeled hashtags");

    size_t nu = g.user_count();
    std::vector<uint64_t> acc_s1(nu, 0), acc_s2(nu, 0);
    std::vector<uint32_t> touched;
    std::vector<uint8_t> seen(nu, 0);

    for (const auto& e : hashtags.entries()) {
        if (e.entity >= g.hashtag_count())
            throw DataError("propagate_tags_to_users: labeled hashtag id " +
                            std::to_string(e.entity) + " not in graph");
        auto& acc = e.stance == StanceId::s1 ? acc_s1 : acc_s2;
        for (const BipartiteGraph::Incident& inc : g.users_of(e.entity)) {
            acc[inc.id] += inc.weight;
            if (!seen[inc.id]) {
                seen[inc.id] = 1;
                touched.push_back(inc.id);
            }
        }
    }
    std::sort(touched.begin(), touched.end());

    StanceAssignment users;
    for (uint32_t u : touched) {
        uint64_t a = acc_s1[u], b = acc_s2[u];
        if (a > b) {
            users.assign(u, StanceId::s1, Provenance::propagated, iteration);
        } else if (b > a) {
            users.assign(u, StanceId::s2, Provenance::propagated, iteration);
        } else if (cfg.tie_policy == TiePolicy::prefer_s1) {
            users.assign(u, StanceId::s1, Provenance::propagated, iteration);
        } else if (cfg.tie_policy == TiePolicy::prefer_s2) {
            users.assign(u, StanceId::s2, Provenance::propagated, iteration);
        }
        // TiePolicy::unlabeled: exact ties get no label
    }
    return users;
}

HashtagScoreTable score_hashtags(const BipartiteGraph& g, const StanceAssignment& users,
                                 const PropagationConfig& cfg) {
    if (users.empty()) throw DataError("score_hashtags: no labeled users");
    size_t n_s1 = users.count(StanceId::s1);
    size_t n_s2 = users.count(StanceId::s2);
    if (n_s1 == 0 || n_s2 == 0)
        throw RuntimeError("score_hashtags: stance group '" +
                           (n_s1 == 0 ? cfg.stances.name_s1 : cfg.stances.name_s2) +
                           "' is empty, score distribution degenerate");

    size_t nh = g.hashtag_count();
    std::vector<uint32_t> cnt_s1(nh, 0), cnt_s2(nh, 0);
    std::vector<uint32_t> touched;
    std::vector<uint8_t> seen(nh, 0);
    for (const auto& e : users.entries()) {
        if (e.entity >= g.user_count())
            throw DataError("score_hashtags: labeled user id " + std::to_string(e.entity) +
                            " not in graph");
        auto& cnt = e.stance == StanceId::s1 ? cnt_s1 : cnt_s2;
        for (const BipartiteGraph::Incident& inc : g.hashtags_of(e.entity)) {
            cnt[inc.id] += 1;  // one distinct-usage contribution per incident edge
            if (!seen[inc.id]) {
                seen[inc.id] = 1;
                touched.push_back(inc.id);
            }
        }
    }
    std::sort(touched.begin(), touched.end());

    HashtagScoreTable table;
    table.scores.reserve(touched.size());
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (uint32_t h : touched) {
        double raw = double(cnt_s2[h]) / double(n_s2) - double(cnt_s1[h]) / double(n_s1);
        table.scores.push_back({h, raw, 0.0});
        lo = first ? raw : std::min(lo, raw);
        hi = first ? raw : std::max(hi, raw);
        first = false;
    }
    if (table.scores.empty() || hi == lo) {
        table.degenerate = true;
        for (HashtagScore& s : table.scores) s.normalized = 0.0;
        return table;
    }
    double mean = 0.0;
    for (HashtagScore& s : table.scores) {
        s.normalized = (s.raw - lo) / (hi - lo);
        mean += s.normalized;
    }
    mean /= double(table.scores.size());
    double var = 0.0;
    for (const HashtagScore& s : table.scores) {
        double d = s.normalized - mean;
        var += d * d;
    }
    size_t denom = cfg.stdev_estimator == StdevEstimator::sample && table.scores.size() > 1
                       ? table.scores.size() - 1
                       : table.scores.size();
    table.mean = mean;
    table.stdev = std::sqrt(var / double(denom));
    table.degenerate = table.stdev == 0.0;
    return table;
}

StanceAssignment propagate_users_to_tags(const BipartiteGraph& g, const StanceAssignment& users,
                                         const PropagationConfig& cfg, uint32_t iteration,
                                         bool* degenerate_warning) {
    StanceAssignment tags = resolve_seeds(g, cfg, nullptr);
    HashtagScoreTable table = score_hashtags(g, users, cfg);
    if (degenerate_warning) *degenerate_warning = table.degenerate;
    if (table.degenerate) return tags;  // no new labels

    // The raw score is high when s2-group usage dominates.
    StanceId high = cfg.high_scores_to_s1 ? StanceId::s1 : StanceId::s2;
    double upper = table.mean + cfg.stdev_multiplier * table.stdev;
    double lower = table.mean - cfg.stdev_multiplier * table.stdev;
    for (const HashtagScore& s : table.scores) {
        if (tags.find(s.hashtag)) continue;  // seeds hold their label
        if (s.normalized >= upper)
            tags.assign(s.hashtag, high, Provenance::propagated, iteration);
        else if (s.normalized <= lower)
            tags.assign(s.hashtag, other(high), Provenance::propagated, iteration);
    }
    return tags;
}

namespace {

// Recomputed assignments keep the iteration stamp of the earlier round when
// the label did not change.
void merge_iteration_stamps(StanceAssignment& fresh, const StanceAssignment& prev) {
    StanceAssignment merged;
    for (const auto& e : fresh.entries()) {
        const auto* old = prev.find(e.entity);
        uint32_t iter = (old && old->stance == e.stance) ? old->iteration : e.iteration;
        Provenance prov = (old && old->stance == e.stance) ? old->provenance : e.provenance;
        merged.assign(e.entity, e.stance, prov, iter);
    }
    fresh = std::move(merged);
}

} // namespace

PropagationResult run_propagation(const BipartiteGraph& g, const PropagationConfig& cfg) {
    cfg.validate();
    PropagationResult res;

    std::vector<std::string> missing;
    StanceAssignment tags = resolve_seeds(g, cfg, &missing);
    for (const std::string& m : missing)
        res.warnings.push_back("seed hashtag '" + m + "' not present in graph, dropped");

    StanceAssignment users_prev;
    for (uint32_t k = 1; k <= cfg.max_iterations; ++k) {
        StanceAssignment users_new = propagate_tags_to_users(g, tags, cfg, k);
        merge_iteration_stamps(users_new, users_prev);
        res.iterations = k;
        if (users_new.same_labels(users_prev)) {
            res.converged = true;
            res.users = std::move(users_new);
            break;
        }
        users_prev = std::move(users_new);
        if (k == cfg.max_iterations) {
            res.users = users_prev;
            break;
        }
        if (users_prev.count(StanceId::s1) == 0 || users_prev.count(StanceId::s2) == 0) {
            res.warnings.push_back("iteration " + std::to_string(k) +
                                   ": one stance group has no users, hashtag step skipped");
            continue;  // tags unchanged; the next user step will reproduce users_prev
        }
        bool degenerate = false;
        StanceAssignment tags_new = propagate_users_to_tags(g, users_prev, cfg, k, &degenerate);
        if (degenerate)
            res.warnings.push_back("iteration " + std::to_string(k) +
                                   ": hashtag scores degenerate, no new hashtag labels");
        merge_iteration_stamps(tags_new, tags);
        tags = std::move(tags_new);
    }
    res.hashtags = std::move(tags);
    return res;
}

} // namespace sg
