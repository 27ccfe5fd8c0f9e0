#include "polwishart/error.hpp"

namespace polwishart {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::NoRootInBracket: return "NoRootInBracket";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::ChiSquareDiverges: return "ChiSquareDiverges";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace polwishart
