#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sg/stance.hpp"

namespace sg {

enum class Topic : uint8_t { gun_control = 0, climate_change = 1 };
const char* topic_name(Topic t);
std::optional<Topic> parse_topic(const std::string& s);

// Per-tweet classification protocol for a topic: the question asked for every
// tweet and the three admissible single-word answers (S1 option, S2 option,
// neutral).
struct TopicPrompt {
    std::string question;
    std::string option_s1;
    std::string option_s2;
    std::string option_neutral;
};
TopicPrompt topic_prompt(Topic t);
StancePair topic_stances(Topic t);

enum class TweetClass : uint8_t { s1 = 0, s2 = 1, neutral = 2 };

struct AnnotationRequest {
    std::string user_id;
    std::vector<std::string> tweets;  // pre-ranked, 1..20 non-empty texts
    Topic topic = Topic::gun_control;

    void validate() const;
};

struct AnnotationResult {
    std::string user_id;
    std::vector<TweetClass> classes;  // one per tweet
    std::optional<StanceId> label;    // nullopt = undetermined
    std::vector<std::string> raw;     // raw response bodies, for audit
    uint32_t unparseable = 0;         // responses coerced to neutral
    bool failed = false;              // transport failure after all retries
    std::string error;
};

// Majority stance wins; all-neutral or an equal nonzero count for both
// stances yields no label.
std::optional<StanceId> aggregate_classes(std::span<const TweetClass> classes);

// Case-insensitive single-word parse of a completion answer; falls back to
// neutral with *parsed=false when the text matches no option.
TweetClass parse_class_answer(const std::string& answer, const TopicPrompt& prompt, bool* parsed);

struct EndpointConfig {
    std::string base_url = "http://127.0.0.1:8089";  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4";
    std::string api_key_env = "STANCE_ANNOTATE_API_KEY";
    double temperature = 0.0;
    uint32_t max_attempts = 3;         // with exponential backoff between tries
    uint32_t backoff_initial_ms = 200; // doubled per retry
    double rate_limit_per_s = 0.0;     // 0 = unlimited; applies per HTTP request
    uint32_t timeout_s = 30;
};

class AnnotationClient {
public:
    explicit AnnotationClient(EndpointConfig cfg);
    ~AnnotationClient();

    AnnotationResult annotate_user(const AnnotationRequest& req);

    // Sequential batch run. Appends `user<TAB>label<TAB>classes` rows to
    // out_path and a status row per user to journal_path; users already
    // marked ok in the journal are skipped, making the batch resumable.
    // Returns the ids that failed.
    std::vector<std::string> annotate_batch(std::span<const AnnotationRequest> requests,
                                            const std::string& out_path,
                                            const std::string& journal_path);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Request-file reader: one structured record per line with fields `user_id`
// and `tweets` (array of strings).
std::vector<AnnotationRequest> read_annotation_requests(const std::string& path, Topic topic);

} // namespace sg
