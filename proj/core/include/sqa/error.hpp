#pragma once

#include <stdexcept>
#include <string>

namespace sqa {

// Error kinds used across the library. Each carries a plain message; callers
// that need to distinguish catch the specific type.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct LengthError : std::runtime_error {
    explicit LengthError(const std::string& msg) : std::runtime_error(msg) {}
};
struct VocabularyError : std::runtime_error {
    explicit VocabularyError(const std::string& msg) : std::runtime_error(msg) {}
};
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};
struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};
struct OracleError : std::runtime_error {
    explicit OracleError(const std::string& msg) : std::runtime_error(msg) {}
};
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};
struct SignalPowerError : std::runtime_error {
    explicit SignalPowerError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sqa
