#include "nodal/errors.hpp"

namespace nodal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotRepresentable: return "NotRepresentable";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::InvalidTheta: return "InvalidTheta";
    case ErrorCode::AsymmetricMeasure: return "AsymmetricMeasure";
    case ErrorCode::AngleOutOfBand: return "AngleOutOfBand";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::SingularAtZero: return "SingularAtZero";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NotDegenerate: return "NotDegenerate";
    case ErrorCode::UnsupportedDirection: return "UnsupportedDirection";
    case ErrorCode::Tie: return "Tie";
    case ErrorCode::NoAtom: return "NoAtom";
    case ErrorCode::NotCillerueloType: return "NotCillerueloType";
    case ErrorCode::RegimeViolation: return "RegimeViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateCovariance:
    case ErrorCode::SingularAtZero:
    case ErrorCode::QuadratureFailure:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace nodal
