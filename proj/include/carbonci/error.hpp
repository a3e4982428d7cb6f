#pragma once

#include <stdexcept>
#include <string>

namespace carbonci {

/// Failure categories shared by every module. Values are mirrored by the C API
/// status codes in carbonci.h, so the order is part of the ABI.
enum class ErrorCode : int {
    InvalidArgument = 1,
    EmptyOverlap,
    OutOfRange,
    ParseError,
    GapTooLarge,
    ZeroGeneration,
    MissingFactor,
    InconsistentHorizon,
    ValueOutOfUnitRange,
    InsufficientHistory,
    ZeroTruthValue,
    LengthMismatch,
    HorizonMismatch,
    TruthMissing,
    DateOutOfStudyRange,
    EmptyInput,
    EmptyWindow,
    WindowTooSmall,
    LagLengthMismatch,
    AlignmentError,
    AlphaMismatch,
    InsufficientDays,
    EmptyTestSplit,
    ConfigError,
    IoError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace carbonci
