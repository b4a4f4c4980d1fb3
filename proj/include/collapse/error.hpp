#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

enum class ErrorCode {
  OutOfDomain,
  DerivativeUnavailable,
  SingularPoint,
  NonInvertible,
  DegenerateMetric,
  ZeroDispersion,
  NotUnit,
  EmptyGrid,
  NotAnEndpoint,
  IncompleteManifold,
  WrongChart,
  DimensionMismatch,
  InsufficientData,
  NotCompact,
  QuadratureFailure,
  Overflow,
  BadParams,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::NonInvertible: return "NonInvertible";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::ZeroDispersion: return "ZeroDispersion";
    case ErrorCode::NotUnit: return "NotUnit";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NotAnEndpoint: return "NotAnEndpoint";
    case ErrorCode::IncompleteManifold: return "IncompleteManifold";
    case ErrorCode::WrongChart: return "WrongChart";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NotCompact: return "NotCompact";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::BadParams: return "BadParams";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode c, const std::string& msg) {
  throw Error(c, msg);
}

}  // namespace collapse
