#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqz {

enum class ErrorKind {
    parameter_domain,   // a value outside its physical domain
    above_threshold,    // pump at or above the oscillation threshold
    degenerate_cavity,  // T + L == 0
    invalid_series,     // empty series, non-finite samples, bad sample rate
    rate_mismatch,      // two series that must share a sample rate do not
    too_short,          // not enough samples for the requested resolution
    shape_mismatch,
    inconsistent_data,  // measurement contradicts the model
    infeasible,         // no solution in the admissible domain
    config,             // configuration validation failure
    io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parameter_domain: return "parameter-domain";
        case ErrorKind::above_threshold: return "above-threshold";
        case ErrorKind::degenerate_cavity: return "degenerate-cavity";
        case ErrorKind::invalid_series: return "invalid-series";
        case ErrorKind::rate_mismatch: return "rate-mismatch";
        case ErrorKind::too_short: return "too-short";
        case ErrorKind::shape_mismatch: return "shape-mismatch";
        case ErrorKind::inconsistent_data: return "inconsistent-data";
        case ErrorKind::infeasible: return "infeasible";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, std::string_view message) {
    if (!condition) throw Error(kind, std::string(message));
}

}  // namespace detail
}  // namespace sqz
