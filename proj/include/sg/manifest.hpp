#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sg {

// Hex-encoded SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);
std::string sha256_bytes(const void* data, size_t n);

// Reproducibility record written beside every command's outputs. Wall time is
// informational and deliberately excluded from output digests, so reruns of
// the same inputs produce byte-identical outputs and matching digest sets.
struct RunManifest {
    std::string command;
    std::string artifact_version;
    std::string resolved_config_json;  // serialized key/value config
    uint64_t seed = 0;
    std::string kernel_isa;
    std::vector<std::pair<std::string, std::string>> input_digests;   // path -> sha256
    std::vector<std::pair<std::string, std::string>> output_digests;  // path -> sha256
    double wall_seconds = 0.0;

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    void write(const std::string& path) const;
};

} // namespace sg
