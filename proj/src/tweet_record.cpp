#include "sg/tweet_record.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sg/binary_io.hpp"
#include "sg/errors.hpp"

namespace sg {

namespace {
using nlohmann::json;

constexpr char kMagic[5] = "TWE1";

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream is(path, mode);
    if (!is) throw DataError("cannot open '" + path + "' for reading");
    return is;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
    return os;
}

} // namespace

const char* interaction_kind_name(InteractionKind k) {
    switch (k) {
        case InteractionKind::retweet: return "retweet";
        case InteractionKind::mention: return "mention";
        case InteractionKind::reply: return "reply";
        case InteractionKind::quote: return "quote";
        case InteractionKind::none: return "none";
    }
    return "none";
}

InteractionKind parse_interaction_kind(std::string_view s) {
    if (s == "retweet") return InteractionKind::retweet;
    if (s == "mention") return InteractionKind::mention;
    if (s == "reply") return InteractionKind::reply;
    if (s == "quote") return InteractionKind::quote;
    if (s == "none") return InteractionKind::none;
    throw DataError("unknown interaction kind '" + std::string(s) + "'");
}

void TweetRecord::validate(size_t expected_dim) const {
    if (author_id.empty()) throw DataError("tweet '" + tweet_id + "': empty author id");
    if (embedding.size() != expected_dim)
        throw DataError("tweet '" + tweet_id + "': embedding dimension " +
                        std::to_string(embedding.size()) + ", expected " +
                        std::to_string(expected_dim));
    for (float c : embedding)
        if (!std::isfinite(c)) throw DataError("tweet '" + tweet_id + "': non-finite embedding component");
    if (!(sentiment >= -1.0 && sentiment <= 1.0))
        throw DataError("tweet '" + tweet_id + "': sentiment outside [-1, +1]");
}

std::vector<TweetRecord> read_tweets_jsonl(const std::string& path) {
    std::ifstream is = open_in(path);
    std::vector<TweetRecord> out;
    std::string line;
    size_t line_no = 0;
    size_t dim = 0;
    bool have_dim = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        TweetRecord r;
        try {
            r.tweet_id = j.at("tweet_id").get<std::string>();
            r.author_id = j.at("author_id").get<std::string>();
            if (j.contains("target_id") && !j.at("target_id").is_null())
                r.target_id = j.at("target_id").get<std::string>();
            r.kind = parse_interaction_kind(j.at("kind").get<std::string>());
            r.sentiment = j.at("sentiment").get<double>();
            r.embedding = j.at("embedding").get<std::vector<float>>();
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_dim) {
            dim = r.embedding.size();
            have_dim = true;
            if (dim == 0)
                throw DataError(path + ":" + std::to_string(line_no) + ": empty embedding");
        }
        r.validate(dim);
        out.push_back(std::move(r));
    }
    return out;
}

void write_tweets_jsonl(const std::string& path, std::span<const TweetRecord> records) {
    std::ofstream os = open_out(path);
    for (const TweetRecord& r : records) {
        json j;
        j["tweet_id"] = r.tweet_id;
        j["author_id"] = r.author_id;
        if (r.target_id.empty())
            j["target_id"] = nullptr;
        else
            j["target_id"] = r.target_id;
        j["kind"] = interaction_kind_name(r.kind);
        j["sentiment"] = r.sentiment;
        j["embedding"] = r.embedding;
        os << j.dump() << '\n';
    }
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

std::vector<TweetRecord> read_tweets_twe1(const std::string& path) {
    std::ifstream is = open_in(path, std::ios::binary);
    bin::expect_magic(is, kMagic, path);
    uint32_t dim = bin::get_u32(is);
    if (dim == 0) throw DataError(path + ": zero embedding dimension in header");
    uint64_t count = bin::get_u64(is);
    std::vector<TweetRecord> out;
    out.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        TweetRecord r;
        r.tweet_id = bin::get_str(is);
        r.author_id = bin::get_str(is);
        r.target_id = bin::get_str(is);
        uint8_t k = bin::get_u8(is);
        if (k > uint8_t(InteractionKind::none))
            throw DataError(path + ": record " + std::to_string(i) + ": bad interaction kind byte");
        r.kind = InteractionKind(k);
        r.sentiment = bin::get_f64(is);
        r.embedding.resize(dim);
        for (uint32_t c = 0; c < dim; ++c) r.embedding[c] = bin::get_f32(is);
        r.validate(dim);
        out.push_back(std::move(r));
    }
    return out;
}

void write_tweets_twe1(const std::string& path, std::span<const TweetRecord> records) {
    std::ofstream os = open_out(path, std::ios::binary);
    uint32_t dim = records.empty() ? 0 : uint32_t(records.front().embedding.size());
    if (dim == 0) throw DataError("packed tweet output needs at least one record with a non-empty embedding");
    bin::put_magic(os, kMagic);
    bin::put_u32(os, dim);
    bin::put_u64(os, records.size());
    for (const TweetRecord& r : records) {
        r.validate(dim);
        bin::put_str(os, r.tweet_id);
        bin::put_str(os, r.author_id);
        bin::put_str(os, r.target_id);
        bin::put_u8(os, uint8_t(r.kind));
        bin::put_f64(os, r.sentiment);
        for (float c : r.embedding) bin::put_f32(os, c);
    }
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

std::vector<TweetRecord> read_tweets_auto(const std::string& path) {
    {
        std::ifstream is = open_in(path, std::ios::binary);
        char head[4] = {0, 0, 0, 0};
        is.read(head, 4);
        if (is.gcount() == 4 && head[0] == 'T' && head[1] == 'W' && head[2] == 'E' && head[3] == '1')
            return read_tweets_twe1(path);
    }
    return read_tweets_jsonl(path);
}

} // namespace sg
