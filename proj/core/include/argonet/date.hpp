#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>

namespace argonet {

using Date = std::chrono::sys_days;
using Days = std::chrono::days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
/// Throws std::invalid_argument on malformed or out-of-range input.
Date parse_date(std::string_view text);

std::string format_date(Date d);

// Errors raised on malformed input data. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Errors raised on invalid configuration or usage. The CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace argonet
