#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ripplekit {

enum class ErrorKind {
    parse,
    invalid_argument,
    degenerate_stats,
    invalid_pair,
    size_limit,
    dimension_mismatch,
    calibration,
    capacity,
    config,
    io,
};

std::string_view to_string(ErrorKind kind);

/// Every component reports failures through this exception; `kind()` lets
/// callers and tests tell the failure classes apart without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace ripplekit
