#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sg {

enum class InteractionKind : uint8_t { retweet = 0, mention = 1, reply = 2, quote = 3, none = 4 };

const char* interaction_kind_name(InteractionKind k);
InteractionKind parse_interaction_kind(std::string_view s);

// One collected tweet: authored content (sentiment + embedding) plus an
// optional directed interaction towards another user.
struct TweetRecord {
    std::string tweet_id;
    std::string author_id;
    std::string target_id;  // empty when the tweet addresses nobody
    InteractionKind kind = InteractionKind::none;
    double sentiment = 0.0;  // in [-1, +1]
    std::vector<float> embedding;

    bool has_target() const { return !target_id.empty(); }
    bool is_interaction() const { return kind != InteractionKind::none && !target_id.empty(); }

    // Checks embedding length/finiteness and sentiment range; messages name
    // the offending tweet id.
    void validate(size_t expected_dim) const;
};

// Newline-delimited records with named fields (tweet_id, author_id,
// target_id, kind, sentiment, embedding); see docs/formats.md.
std::vector<TweetRecord> read_tweets_jsonl(const std::string& path);
void write_tweets_jsonl(const std::string& path, std::span<const TweetRecord> records);

// Packed binary variant (magic "TWE1", embedding dimension in the header,
// f32 components, little-endian) for bulk runs.
std::vector<TweetRecord> read_tweets_twe1(const std::string& path);
void write_tweets_twe1(const std::string& path, std::span<const TweetRecord> records);

// Dispatches on the magic bytes: TWE1 -> packed reader, otherwise JSONL.
std::vector<TweetRecord> read_tweets_auto(const std::string& path);

} // namespace sg
