#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace metro {

enum class ErrorCode {
    NonPositiveRunTime,
    MarginViolation,
    SaturatedPlatform,
    EmptyPart,
    MissingPlatform,
    InvalidParameter,
    InfeasibleSeed,
    NegativeInterval,
    Deadlock,
    WindowTooShort,
    DimensionMismatch,
    NotStronglyConnected,
    DemandNotZero,
    EmptySystem,
    InsufficientData,
    Unclassifiable,
    MissingRegion,
    GridMismatch,
    ConfigParse,
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }
    // Message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

// Raised when no segment can emit its next departure. `cycle` lists the
// segments of the circular wait, in dependency order.
class DeadlockError : public Error {
public:
    DeadlockError(std::vector<int> cycle, const std::string& what);

    const std::vector<int>& cycle() const noexcept { return cycle_; }

private:
    std::vector<int> cycle_;
};

}  // namespace metro
