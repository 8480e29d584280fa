#include "noisycal/error.hpp"

namespace noisycal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularTransition: return "SingularTransition";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::CholeskyFailure: return "CholeskyFailure";
    case ErrorCode::LadderMismatch: return "LadderMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingularM: return "SingularM";
    case ErrorCode::InsufficientVertices: return "InsufficientVertices";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolverFailure:
    case ErrorCode::CholeskyFailure:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, const std::string& message, int index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message), index_(index) {}

}  // namespace noisycal
