#include "sg/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "sg/errors.hpp"
#include "sg/rng.hpp"

namespace sg {

void SynthConfig::validate() const {
    if (users_s1 < 1 || users_s2 < 1) throw ConfigError("synth: both communities need users");
    if (hashtags_per_community < 1) throw ConfigError("synth: need community hashtags");
    if (!(leak >= 0.0 && leak <= 1.0)) throw ConfigError("synth: leak must lie in [0, 1]");
    if (!(neutral_rate >= 0.0 && neutral_rate <= 1.0))
        throw ConfigError("synth: neutral rate must lie in [0, 1]");
    if (!(homophily >= 0.0 && homophily <= 1.0))
        throw ConfigError("synth: homophily must lie in [0, 1]");
    if (!(sentiment_in > sentiment_cross))
        throw ConfigError("synth: in-community sentiment mean must exceed cross-community mean");
    if (sentiment_in < -1.0 || sentiment_in > 1.0 || sentiment_cross < -1.0 || sentiment_cross > 1.0)
        throw ConfigError("synth: sentiment means must lie in [-1, +1]");
    if (!(mean_usages_per_user > 0.0) || !(mean_interactions_per_user >= 0.0) ||
        !(mean_solo_tweets_per_user >= 0.0))
        throw ConfigError("synth: rates must be positive");
    if (feature_dim < 1) throw ConfigError("synth: feature dim must be >= 1");
    if (!(feature_noise >= 0.0) || !(centroid_scale >= 0.0))
        throw ConfigError("synth: feature scales must be non-negative");
    if (seeds_per_side < 1 || seeds_per_side > hashtags_per_community)
        throw ConfigError("synth: seeds per side must lie in [1, hashtags per community]");
    if (users_s1 + users_s2 < 2) throw ConfigError("synth: need at least 2 users");
}

namespace {

std::string user_name(uint32_t i) { return "u" + std::to_string(i + 1); }

std::string tag_name(int community, uint32_t j) {
    // community: 0 = S1 pool, 1 = S2 pool, 2 = shared neutral
    static const char* prefix[3] = {"alpha", "beta", "neutral"};
    return prefix[community] + std::to_string(j + 1);
}

double clamp_sentiment(double s) { return std::clamp(s, -1.0, 1.0); }

} // namespace

SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    SynthResult out;
    out.stances = cfg.stances;
    uint32_t n = cfg.users_s1 + cfg.users_s2;
    auto community_of = [&](uint32_t u) { return u < cfg.users_s1 ? 0 : 1; };

    out.truth.reserve(n);
    for (uint32_t u = 0; u < n; ++u)
        out.truth.push_back({user_name(u),
                             community_of(u) == 0 ? StanceId::s1 : StanceId::s2});

    // --- hashtag usages -----------------------------------------------------
    Rng rng_posts(derive_seed(cfg.seed, 10));
    std::vector<std::vector<uint64_t>> usage(3);
    usage[0].assign(cfg.hashtags_per_community, 0);
    usage[1].assign(cfg.hashtags_per_community, 0);
    usage[2].assign(cfg.neutral_hashtags, 0);
    // in-community usage only, drives seed designation
    std::vector<uint64_t> own_usage[2];
    own_usage[0].assign(cfg.hashtags_per_community, 0);
    own_usage[1].assign(cfg.hashtags_per_community, 0);

    for (uint32_t u = 0; u < n; ++u) {
        uint64_t k = rng_posts.poisson(cfg.mean_usages_per_user);
        if (k == 0) continue;  // user posts no hashtags
        PostRecord rec;
        rec.user = user_name(u);
        int own = community_of(u);
        for (uint64_t i = 0; i < k; ++i) {
            int pool;
            if (cfg.neutral_hashtags > 0 && rng_posts.bernoulli(cfg.neutral_rate))
                pool = 2;
            else
                pool = rng_posts.bernoulli(cfg.leak) ? 1 - own : own;
            uint32_t j = uint32_t(rng_posts.below(usage[pool].size()));
            rec.hashtags.push_back(tag_name(pool, j));
            usage[pool][j]++;
            if (pool == own) own_usage[own][j]++;
        }
        out.posts.push_back(std::move(rec));
    }

    // Seeds: the highest in-community-usage hashtags per side (name-ordered on
    // ties).
    for (int c = 0; c < 2; ++c) {
        std::vector<uint32_t> order(cfg.hashtags_per_community);
        for (uint32_t j = 0; j < cfg.hashtags_per_community; ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            return own_usage[c][a] > own_usage[c][b];
        });
        auto& dst = c == 0 ? out.seeds_s1 : out.seeds_s2;
        for (uint32_t k = 0; k < cfg.seeds_per_side; ++k) dst.push_back(tag_name(c, order[k]));
    }

    // --- tweets: solo + interaction -----------------------------------------
    Rng rng_tw(derive_seed(cfg.seed, 11));
    double inv_sqrt_d = 1.0 / std::sqrt(double(cfg.feature_dim));
    auto draw_embedding = [&](int community) {
        std::vector<float> e(cfg.feature_dim);
        double c = (community == 0 ? 1.0 : -1.0) * cfg.centroid_scale * inv_sqrt_d;
        for (uint32_t i = 0; i < cfg.feature_dim; ++i)
            e[i] = float(c + cfg.feature_noise * rng_tw.normal());
        return e;
    };
    static const InteractionKind kinds[4] = {InteractionKind::retweet, InteractionKind::mention,
                                             InteractionKind::reply, InteractionKind::quote};
    uint64_t tweet_no = 0;
    for (uint32_t u = 0; u < n; ++u) {
        int own = community_of(u);
        uint64_t solo = 1 + rng_tw.poisson(cfg.mean_solo_tweets_per_user);
        for (uint64_t i = 0; i < solo; ++i) {
            TweetRecord r;
            r.tweet_id = "t" + std::to_string(++tweet_no);
            r.author_id = user_name(u);
            r.kind = InteractionKind::none;
            r.sentiment = clamp_sentiment(rng_tw.normal(0.0, cfg.sentiment_noise));
            r.embedding = draw_embedding(own);
            out.tweets.push_back(std::move(r));
        }
        uint64_t m = rng_tw.poisson(cfg.mean_interactions_per_user);
        for (uint64_t i = 0; i < m; ++i) {
            bool in_community = rng_tw.bernoulli(cfg.homophily);
            int tc = in_community ? own : 1 - own;
            uint32_t lo = tc == 0 ? 0 : cfg.users_s1;
            uint32_t sz = tc == 0 ? cfg.users_s1 : cfg.users_s2;
            uint32_t target = lo + uint32_t(rng_tw.below(sz));
            if (target == u) {
                if (sz == 1) continue;  // nobody else to address
                target = lo + (target - lo + 1) % sz;
            }
            bool same = community_of(target) == own;
            (same ? out.interactions_in : out.interactions_cross)++;
            TweetRecord r;
            r.tweet_id = "t" + std::to_string(++tweet_no);
            r.author_id = user_name(u);
            r.target_id = user_name(target);
            r.kind = kinds[rng_tw.below(4)];
            double mean = same ? cfg.sentiment_in : cfg.sentiment_cross;
            r.sentiment = clamp_sentiment(rng_tw.normal(mean, cfg.sentiment_noise));
            r.embedding = draw_embedding(own);
            out.tweets.push_back(std::move(r));
        }
    }
    return out;
}

void write_synth_dataset(const std::string& dir, const SynthResult& r, bool jsonl_mirror) {
    std::filesystem::create_directories(dir);
    auto p = [&](const char* f) { return (std::filesystem::path(dir) / f).string(); };
    write_posts_tsv(p("posts.tsv"), r.posts);
    write_tweets_twe1(p("tweets.twe1"), r.tweets);
    if (jsonl_mirror) write_tweets_jsonl(p("tweets.jsonl"), r.tweets);
    std::vector<InteractionRecord> inter;
    for (const TweetRecord& t : r.tweets)
        if (t.is_interaction()) inter.push_back({t.author_id, t.target_id, t.sentiment});
    write_interactions_tsv(p("interactions.tsv"), inter);
    write_truth_tsv(p("truth.tsv"), r.truth, r.stances);
    write_seed_lines(p("seeds_s1.txt"), r.seeds_s1);
    write_seed_lines(p("seeds_s2.txt"), r.seeds_s2);
}

SynthConfig synth_preset(const std::string& name) {
    SynthConfig cfg;
    if (name == "default") return cfg;
    if (name == "recovery") {
        cfg.users_s1 = 1000;
        cfg.users_s2 = 1000;
        cfg.leak = 0.05;
        cfg.mean_usages_per_user = 8.0;
        cfg.homophily = 0.92;
        cfg.feature_noise = 0.8;
        cfg.centroid_scale = 1.0;
        return cfg;
    }
    if (name == "noisy") {
        cfg.users_s1 = 600;
        cfg.users_s2 = 600;
        cfg.leak = 0.08;
        cfg.homophily = 0.93;
        cfg.mean_interactions_per_user = 10.0;
        cfg.centroid_scale = 1.0;
        cfg.feature_noise = 3.0;  // features alone separate the classes poorly
        return cfg;
    }
    if (name == "imbalance10") {
        cfg.users_s1 = 1000;
        cfg.users_s2 = 100;
        return cfg;
    }
    throw ConfigError("unknown synth preset '" + name +
                      "' (expected default, recovery, noisy or imbalance10)");
}

} // namespace sg
