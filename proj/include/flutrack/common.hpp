#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace flutrack {

// Raised for bad configuration, malformed input files, or schema violations.
// The CLI maps this to exit code 1.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a computation cannot proceed (rank deficiency, separation,
// non-PSD covariance, failed convergence). The CLI maps this to exit code 2.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double inv_logit(double x) {
    // Split on sign so the exponential never overflows.
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double square(double x) { return x * x; }

} // namespace flutrack
