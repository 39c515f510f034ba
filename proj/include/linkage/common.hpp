#pragma once
// Shared error types and version info.

#include <stdexcept>
#include <string>

namespace linkage {

inline constexpr const char* kVersion = "0.1.0";

// Invalid input data: bad file, broken invariant, inconsistent ids.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad command-line or config usage.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace linkage
