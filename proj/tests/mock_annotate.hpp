#pragma once

// Scripted OpenAI-style completion endpoint for annotation tests. The reply
// is derived from the tweet text in the request so callers can stage any
// conversation without shared state.

#include <atomic>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sg/annotate.hpp"

namespace sgtest {

struct MockServer {
    httplib::Server srv;
    std::thread th;
    int port = 0;
    std::atomic<int> hits{0};
    std::function<std::string(const std::string&)> answer = [](const std::string&) {
        return "neutral";
    };
    // Returns the HTTP status for this hit; 200 produces a completion.
    std::function<int(const std::string&, int)> status = [](const std::string&, int) {
        return 200;
    };
    std::string last_auth;

    MockServer() {
        srv.Post("/v1/chat/completions",
                 [this](const httplib::Request& rq, httplib::Response& rs) {
                     int n = ++hits;
                     last_auth = rq.get_header_value("Authorization");
                     std::string tweet;
                     try {
                         auto j = nlohmann::json::parse(rq.body);
                         std::string content = j.at("messages").at(1).at("content");
                         auto pos = content.find("Message: ");
                         if (pos != std::string::npos) tweet = content.substr(pos + 9);
                     } catch (...) {
                     }
                     int st = status(tweet, n);
                     if (st != 200) {
                         rs.status = st;
                         rs.set_content("scripted failure", "text/plain");
                         return;
                     }
                     nlohmann::json reply{
                         {"choices",
                          {{{"message", {{"role", "assistant"}, {"content", answer(tweet)}}}}}}};
                     rs.set_content(reply.dump(), "application/json");
                 });
        port = srv.bind_to_any_port("127.0.0.1");
        if (port <= 0) throw std::runtime_error("mock server: bind failed");
        th = std::thread([this] { srv.listen_after_bind(); });
        srv.wait_until_ready();
    }

    ~MockServer() {
        srv.stop();
        th.join();
    }

    sg::EndpointConfig config() const {
        sg::EndpointConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port);
        c.backoff_initial_ms = 1;
        c.timeout_s = 5;
        c.api_key_env = "SG_TEST_NO_SUCH_KEY";
        return c;
    }
};

// Answers by keyword: tweets mentioning PRO/ANTI get that stance, the rest
// are neutral.
inline std::string keyword_answer(const std::string& tweet) {
    if (tweet.find("PRO") != std::string::npos) return "pro";
    if (tweet.find("ANTI") != std::string::npos) return "anti";
    return "neutral";
}

} // namespace sgtest
