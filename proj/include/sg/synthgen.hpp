#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sg/stance.hpp"
#include "sg/text_io.hpp"
#include "sg/tweet_record.hpp"

namespace sg {

// Planted two-community dataset generator. Community 1 is stance S1.
struct SynthConfig {
    uint32_t users_s1 = 500;
    uint32_t users_s2 = 500;

    uint32_t hashtags_per_community = 20;
    uint32_t neutral_hashtags = 10;
    double mean_usages_per_user = 6.0;  // Poisson rate of hashtag usages
    double neutral_rate = 0.2;          // P(usage hits the shared-neutral pool)
    double leak = 0.05;                 // P(non-neutral usage hits the other community)

    double mean_interactions_per_user = 8.0;  // Poisson rate of directed interactions
    double homophily = 0.9;                   // P(interaction target is in-community)
    double sentiment_in = 0.6;                // sentiment mean, in-community
    double sentiment_cross = -0.6;            // sentiment mean, cross-community
    double sentiment_noise = 0.2;             // normal noise on sentiment, clamped to [-1,1]

    double mean_solo_tweets_per_user = 2.0;  // non-interaction tweets beyond the first

    uint32_t feature_dim = 16;
    double centroid_scale = 1.0;  // community centroids at ±scale/√d per component
    double feature_noise = 1.0;   // isotropic stdev around the centroid

    uint32_t seeds_per_side = 3;  // highest in-community usage hashtags
    uint64_t seed = 42;
    StancePair stances{"s1", "s2"};

    void validate() const;
};

struct SynthResult {
    std::vector<PostRecord> posts;
    std::vector<TweetRecord> tweets;
    std::vector<TruthLabel> truth;  // covers every user
    std::vector<std::string> seeds_s1, seeds_s2;
    StancePair stances;

    // Empirical counters for property tests.
    uint64_t interactions_in = 0;
    uint64_t interactions_cross = 0;
};

SynthResult generate(const SynthConfig& cfg);

// Writes posts.tsv, tweets.twe1 (and tweets.jsonl when small), interactions.tsv,
// truth.tsv, seeds_s1.txt, seeds_s2.txt under dir (created if missing).
void write_synth_dataset(const std::string& dir, const SynthResult& r, bool jsonl_mirror = false);

// Named presets: "default", "recovery", "noisy", "imbalance10".
SynthConfig synth_preset(const std::string& name);

} // namespace sg
