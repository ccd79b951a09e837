#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nodal {

enum class ErrorCode {
  InvalidArgument,
  NotRepresentable,
  UnsupportedOrder,
  InvalidTheta,
  AsymmetricMeasure,
  AngleOutOfBand,
  DegenerateCovariance,
  SingularAtZero,
  QuadratureFailure,
  NotDegenerate,
  UnsupportedDirection,
  Tie,
  NoAtom,
  NotCillerueloType,
  RegimeViolation,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Numerical failures map to CLI exit status 2, everything else to 1.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace nodal
