#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hydrocast {

enum class Errc {
  EmptySeries,
  NonQuarterlyGap,
  DuplicateTimestamp,
  NegativeValue,
  NonFiniteValue,
  InvalidTimestamp,
  MalformedRow,
  DuplicateObservation,
  ValidationFailure,
  InvalidConfig,
  LengthMismatch,
  ZeroVector,
  EmptyInput,
  InsufficientHistory,
  NonConvergence,
  AllFitsFailed,
  ShapeMismatch,
  NonFiniteActivation,
  DivergedLoss,
  TooShort,
  ConfigError,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

// Every recoverable failure in the library is reported through this type so
// callers can branch on code() and the benchmark can record it as a row tag.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hydrocast
