#pragma once

#include <stdexcept>
#include <string>

namespace pslab {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised whenever an enumeration would exceed its configured size limit.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PaddingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PowerError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct AccuracyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    ConfigError(std::string key, const std::string& msg)
        : std::runtime_error(key + ": " + msg), key_path(std::move(key)) {}
    std::string key_path;
};

}  // namespace pslab
