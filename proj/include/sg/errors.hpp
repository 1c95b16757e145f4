#pragma once

#include <stdexcept>
#include <string>

namespace sg {

// Error taxonomy mapped to CLI exit codes: config=2, data=3, runtime=4.
enum class ErrorKind { config, data, runtime };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Invalid configuration: bad flags, inconsistent PropagationConfig/TrainConfig, missing seeds.
class ConfigError : public Error {
public:
    explicit ConfigError(std::string msg) : Error(ErrorKind::config, std::move(msg)) {}
};

// Invalid input data: malformed records, out-of-range values, dimension mismatches.
class DataError : public Error {
public:
    explicit DataError(std::string msg) : Error(ErrorKind::data, std::move(msg)) {}
};

// Failures at run time: divergence, I/O errors, degenerate distributions.
class RuntimeError : public Error {
public:
    explicit RuntimeError(std::string msg) : Error(ErrorKind::runtime, std::move(msg)) {}
};

} // namespace sg
