#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace telesim {

/// Stable error codes shared by every module. Each code maps to one failure
/// class so callers (and the CLI exit-code contract) can dispatch on it.
enum class ErrorCode {
    DuplicateMode,
    EmptyModes,
    UnknownMode,
    TruncationOverflow,
    NonUnitary,
    ImpossibleOutcome,
    BadParam,
    BadWiring,
    PolarizationMismatch,
    NotNormalized,
    BadCalibration,
    FitUnderdetermined,
    GridMismatch,
    BadBench,
    BadInput,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace telesim
