#include "sg/annotate.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sg/errors.hpp"
#include "sg/util.hpp"

namespace sg {

using nlohmann::json;

const char* topic_name(Topic t) {
    return t == Topic::gun_control ? "gun_control" : "climate_change";
}

std::optional<Topic> parse_topic(const std::string& s) {
    if (s == "gun_control" || s == "gun-control" || s == "gun") return Topic::gun_control;
    if (s == "climate_change" || s == "climate-change" || s == "climate")
        return Topic::climate_change;
    return std::nullopt;
}

TopicPrompt topic_prompt(Topic t) {
    if (t == Topic::gun_control)
        return {"The stance of the content. Is the message pro gun control, anti gun control, "
                "or neutral?",
                "pro", "anti", "neutral"};
    return {"The stance of the content. Does the message capture the user's belief in climate "
            "change, disbelief, or is it neutral?",
            "belief", "disbelief", "neutral"};
}

StancePair topic_stances(Topic t) {
    if (t == Topic::gun_control) return {"pro", "anti"};
    return {"believe", "disbelieve"};
}

void AnnotationRequest::validate() const {
    if (user_id.empty()) throw DataError("annotation request: empty user id");
    if (tweets.empty() || tweets.size() > 20)
        throw DataError("annotation request for '" + user_id + "': need 1..20 tweets, got " +
                        std::to_string(tweets.size()));
    for (const std::string& t : tweets)
        if (trim(t).empty())
            throw DataError("annotation request for '" + user_id + "': empty tweet text");
}

std::optional<StanceId> aggregate_classes(std::span<const TweetClass> classes) {
    size_t n1 = 0, n2 = 0;
    for (TweetClass c : classes) {
        if (c == TweetClass::s1) ++n1;
        if (c == TweetClass::s2) ++n2;
    }
    if (n1 > n2) return StanceId::s1;
    if (n2 > n1) return StanceId::s2;
    return std::nullopt;  // all neutral, or equal nonzero counts
}

TweetClass parse_class_answer(const std::string& answer, const TopicPrompt& prompt, bool* parsed) {
    std::string a = ascii_lower(trim(answer));
    while (!a.empty() && (a.back() == '.' || a.back() == '!' || a.back() == '"' || a.back() == '\''))
        a.pop_back();
    while (!a.empty() && (a.front() == '"' || a.front() == '\'')) a.erase(a.begin());
    if (parsed) *parsed = true;
    if (a == ascii_lower(prompt.option_s1)) return TweetClass::s1;
    if (a == ascii_lower(prompt.option_s2)) return TweetClass::s2;
    if (a == ascii_lower(prompt.option_neutral)) return TweetClass::neutral;
    if (parsed) *parsed = false;
    return TweetClass::neutral;
}

struct AnnotationClient::Impl {
    EndpointConfig cfg;
    std::unique_ptr<httplib::Client> http;
    std::chrono::steady_clock::time_point next_slot = std::chrono::steady_clock::now();

    explicit Impl(EndpointConfig c) : cfg(std::move(c)) {
        http = std::make_unique<httplib::Client>(cfg.base_url);
        http->set_connection_timeout(time_t(cfg.timeout_s));
        http->set_read_timeout(time_t(cfg.timeout_s));
        const char* key = std::getenv(cfg.api_key_env.c_str());
        if (key && *key) http->set_bearer_token_auth(key);
    }

    void rate_limit() {
        if (cfg.rate_limit_per_s <= 0.0) return;
        auto now = std::chrono::steady_clock::now();
        if (now < next_slot) std::this_thread::sleep_for(next_slot - now);
        auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / cfg.rate_limit_per_s));
        next_slot = std::max(now, next_slot) + interval;
    }

    // One tweet -> one chat completion; retries transport/server errors.
    std::string classify_tweet(const TopicPrompt& prompt, const std::string& tweet) {
        json body{
            {"model", cfg.model},
            {"temperature", cfg.temperature},
            {"messages",
             {{{"role", "system"},
               {"content", "You classify the stance of social media posts. Answer with exactly "
                           "one word: " +
                               prompt.option_s1 + ", " + prompt.option_s2 + ", or " +
                               prompt.option_neutral + "."}},
              {{"role", "user"}, {"content", prompt.question + "\n\nMessage: " + tweet}}}}};
        std::string payload = body.dump();
        std::string last_error;
        for (uint32_t attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
            if (attempt > 1)
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    uint64_t(cfg.backoff_initial_ms) << (attempt - 2)));
            rate_limit();
            httplib::Result res = http->Post(cfg.path, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 200) return res->body;
            last_error = "http status " + std::to_string(res->status);
            if (res->status >= 400 && res->status < 500 && res->status != 429)
                break;  // retrying a non-throttle client error cannot help
        }
        throw RuntimeError(last_error);
    }
};

AnnotationClient::AnnotationClient(EndpointConfig cfg) : impl_(new Impl(std::move(cfg))) {}
AnnotationClient::~AnnotationClient() = default;

AnnotationResult AnnotationClient::annotate_user(const AnnotationRequest& req) {
    req.validate();
    TopicPrompt prompt = topic_prompt(req.topic);
    AnnotationResult res;
    res.user_id = req.user_id;
    for (const std::string& tweet : req.tweets) {
        std::string body;
        try {
            body = impl_->classify_tweet(prompt, tweet);
        } catch (const RuntimeError& e) {
            res.failed = true;
            res.error = e.what();
            return res;
        }
        res.raw.push_back(body);
        std::string answer;
        try {
            json j = json::parse(body);
            answer = j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            answer.clear();  // fall through to the unparseable path
        }
        bool parsed = false;
        TweetClass c = parse_class_answer(answer, prompt, &parsed);
        if (!parsed) res.unparseable += 1;
        res.classes.push_back(c);
    }
    res.label = aggregate_classes(res.classes);
    return res;
}

std::vector<std::string> AnnotationClient::annotate_batch(
    std::span<const AnnotationRequest> requests, const std::string& out_path,
    const std::string& journal_path) {
    std::unordered_set<std::string> done;
    {
        std::ifstream journal(journal_path);
        std::string line;
        while (std::getline(journal, line)) {
            auto cols = split(trim(line), '\t');
            if (cols.size() == 2 && cols[1] == "ok") done.emplace(cols[0]);
        }
    }
    std::ofstream out(out_path, std::ios::app);
    if (!out) throw RuntimeError("cannot open '" + out_path + "' for writing");
    std::ofstream journal(journal_path, std::ios::app);
    if (!journal) throw RuntimeError("cannot open '" + journal_path + "' for writing");

    std::vector<std::string> failed;
    for (const AnnotationRequest& req : requests) {
        if (done.count(req.user_id)) continue;
        AnnotationResult res = annotate_user(req);
        if (res.failed) {
            failed.push_back(req.user_id);
            journal << req.user_id << "\tfailed\t" << res.error << '\n' << std::flush;
            continue;
        }
        StancePair names = topic_stances(req.topic);
        TopicPrompt prompt = topic_prompt(req.topic);
        out << req.user_id << '\t'
            << (res.label ? names.name(*res.label) : std::string("undetermined")) << '\t';
        for (size_t i = 0; i < res.classes.size(); ++i) {
            if (i) out << ',';
            switch (res.classes[i]) {
                case TweetClass::s1: out << prompt.option_s1; break;
                case TweetClass::s2: out << prompt.option_s2; break;
                case TweetClass::neutral: out << prompt.option_neutral; break;
            }
        }
        out << '\n' << std::flush;
        journal << req.user_id << "\tok\n" << std::flush;
    }
    return failed;
}

std::vector<AnnotationRequest> read_annotation_requests(const std::string& path, Topic topic) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path + "' for reading");
    std::vector<AnnotationRequest> out;
    std::string line;
    size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            AnnotationRequest req;
            req.user_id = j.at("user_id").get<std::string>();
            req.tweets = j.at("tweets").get<std::vector<std::string>>();
            req.topic = topic;
            req.validate();
            out.push_back(std::move(req));
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    if (out.empty()) throw DataError(path + ": no annotation requests");
    return out;
}

} // namespace sg
