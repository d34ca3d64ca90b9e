#pragma once

#include <stdexcept>
#include <string>

namespace banf {

// Bad shapes, malformed configs, invalid arguments.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values, divergence.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API called out of order (e.g. backward before forward).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace banf
