#include "hydrocast/error.hpp"

namespace hydrocast {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::NonQuarterlyGap: return "NonQuarterlyGap";
    case Errc::DuplicateTimestamp: return "DuplicateTimestamp";
    case Errc::NegativeValue: return "NegativeValue";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::InvalidTimestamp: return "InvalidTimestamp";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::DuplicateObservation: return "DuplicateObservation";
    case Errc::ValidationFailure: return "ValidationFailure";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InsufficientHistory: return "InsufficientHistory";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::AllFitsFailed: return "AllFitsFailed";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteActivation: return "NonFiniteActivation";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::TooShort: return "TooShort";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hydrocast
