#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noisycal {

enum class ErrorCode {
  InvalidSpec,
  InvalidArgument,
  SingularTransition,
  MissingClass,
  InvalidProbability,
  EmptyClass,
  SolverFailure,
  CholeskyFailure,
  LadderMismatch,
  LengthMismatch,
  SingularM,
  InsufficientVertices,
  DegenerateData,
  DimensionMismatch,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Errors caused by bad user input, as opposed to numerical breakdowns.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int index = -1);

  ErrorCode code() const noexcept { return code_; }
  // Offending class label (0-based) or line number, when one applies.
  int index() const noexcept { return index_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
  int index_;
};

}  // namespace noisycal
