#pragma once

#include <stdexcept>
#include <string>

namespace mahler {

// Malformed spec text or parameters.
struct SpecParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 0 < integral of e^{-phi} < infinity failed (slope <= 0, empty domain, ...).
struct IntegrabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dual grid would silently clip dom(L phi); carries the range that would work.
struct DualRangeError : std::runtime_error {
    DualRangeError(const std::string& msg, double required)
        : std::runtime_error(msg), required_range(required) {}
    double required_range;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mahler
