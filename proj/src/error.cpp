#include "metro/error.hpp"

#include <utility>

namespace metro {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveRunTime: return "NonPositiveRunTime";
    case ErrorCode::MarginViolation: return "MarginViolation";
    case ErrorCode::SaturatedPlatform: return "SaturatedPlatform";
    case ErrorCode::EmptyPart: return "EmptyPart";
    case ErrorCode::MissingPlatform: return "MissingPlatform";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InfeasibleSeed: return "InfeasibleSeed";
    case ErrorCode::NegativeInterval: return "NegativeInterval";
    case ErrorCode::Deadlock: return "Deadlock";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorCode::DemandNotZero: return "DemandNotZero";
    case ErrorCode::EmptySystem: return "EmptySystem";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::Unclassifiable: return "Unclassifiable";
    case ErrorCode::MissingRegion: return "MissingRegion";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::Io: return "IO";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

DeadlockError::DeadlockError(std::vector<int> cycle, const std::string& what)
    : Error(ErrorCode::Deadlock, what), cycle_(std::move(cycle)) {}

}  // namespace metro
