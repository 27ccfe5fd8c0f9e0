#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polwishart {

enum class ErrorCode {
  NotPositiveDefinite,
  DimensionMismatch,
  DomainError,
  EmptySample,
  NoRootInBracket,
  NumericalFailure,
  ChiSquareDiverges,
  QuadratureFailure,
  InsufficientData,
  ParseError,
  ValidationError,
  IoError,
};

/// Stable, machine-readable name of an error code (used by the CLI).
std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polwishart
