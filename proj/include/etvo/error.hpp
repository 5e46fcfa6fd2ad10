#pragma once

#include <stdexcept>
#include <string>

namespace etvo {

enum class ErrorCode {
    file_not_found,
    parse_error,
    non_uniform_sampling,
    io_error,
    invalid_signal,
    invalid_argument,
    incompatible_sampling,
    range_not_multiple_of_period,
    insufficient_coverage,
    length_mismatch,
    empty_signal,
    invalid_config,
    corrupt_direction_matrix,
    invalid_path,
    too_short,
    negative_evo,
    zero_power_signal,
    slack_unsupported,
    too_large,
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::file_not_found: return "FileNotFound";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::non_uniform_sampling: return "NonUniformSampling";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::invalid_signal: return "InvalidSignal";
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::incompatible_sampling: return "IncompatibleSampling";
        case ErrorCode::range_not_multiple_of_period: return "RangeNotMultipleOfPeriod";
        case ErrorCode::insufficient_coverage: return "InsufficientCoverage";
        case ErrorCode::length_mismatch: return "LengthMismatch";
        case ErrorCode::empty_signal: return "EmptySignal";
        case ErrorCode::invalid_config: return "InvalidConfig";
        case ErrorCode::corrupt_direction_matrix: return "CorruptDirectionMatrix";
        case ErrorCode::invalid_path: return "InvalidPath";
        case ErrorCode::too_short: return "TooShort";
        case ErrorCode::negative_evo: return "NegativeEvo";
        case ErrorCode::zero_power_signal: return "ZeroPowerSignal";
        case ErrorCode::slack_unsupported: return "SlackUnsupported";
        case ErrorCode::too_large: return "TooLarge";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// message is prefixed with the code name so CLI output stays greppable.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace etvo
