#include "sg/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "sg/errors.hpp"

namespace sg {

namespace {

std::string hex(const unsigned char* digest, unsigned len) {
    static const char* x = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(x[digest[i] >> 4]);
        out.push_back(x[digest[i] & 0xf]);
    }
    return out;
}

struct EvpCtx {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~EvpCtx() { EVP_MD_CTX_free(ctx); }
};

} // namespace

std::string sha256_bytes(const void* data, size_t n) {
    EvpCtx c;
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (!c.ctx || EVP_DigestInit_ex(c.ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(c.ctx, data, n) != 1 || EVP_DigestFinal_ex(c.ctx, digest, &len) != 1)
        throw RuntimeError("sha256 digest computation failed");
    return hex(digest, len);
}

std::string sha256_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "' for digesting");
    EvpCtx c;
    if (!c.ctx || EVP_DigestInit_ex(c.ctx, EVP_sha256(), nullptr) != 1)
        throw RuntimeError("sha256 digest computation failed");
    char buf[1 << 16];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        if (EVP_DigestUpdate(c.ctx, buf, size_t(is.gcount())) != 1)
            throw RuntimeError("sha256 digest computation failed");
        if (!is) break;
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (EVP_DigestFinal_ex(c.ctx, digest, &len) != 1)
        throw RuntimeError("sha256 digest computation failed");
    return hex(digest, len);
}

void RunManifest::add_input(const std::string& path) {
    input_digests.emplace_back(path, sha256_file(path));
}

void RunManifest::add_output(const std::string& path) {
    output_digests.emplace_back(path, sha256_file(path));
}

void RunManifest::write(const std::string& path) const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["artifact_version"] = artifact_version;
    j["seed"] = seed;
    j["kernel_isa"] = kernel_isa;
    if (!resolved_config_json.empty())
        j["config"] = nlohmann::ordered_json::parse(resolved_config_json);
    auto digests = [](const std::vector<std::pair<std::string, std::string>>& v) {
        nlohmann::ordered_json o = nlohmann::ordered_json::object();
        for (const auto& [p, d] : v) o[p] = d;
        return o;
    };
    j["inputs"] = digests(input_digests);
    j["outputs"] = digests(output_digests);
    j["wall_seconds"] = wall_seconds;
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

} // namespace sg
