#pragma once

#include <stdexcept>
#include <string>

namespace polygauss {

enum class ErrorCode {
  ParseError,
  InvalidPolyhedron,
  EmptyPolyhedron,
  NotGeneralPosition,
  LpNumericalFailure,
  SingularGram,
  NonPositiveDefinite,
  ShiftTooSmall,
  StepUnderflow,
  NonFiniteState,
  SingularLocusCrossing,
  OracleMismatch,
};

inline const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidPolyhedron: return "InvalidPolyhedron";
    case ErrorCode::EmptyPolyhedron: return "EmptyPolyhedron";
    case ErrorCode::NotGeneralPosition: return "NotGeneralPosition";
    case ErrorCode::LpNumericalFailure: return "LpNumericalFailure";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::ShiftTooSmall: return "ShiftTooSmall";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::SingularLocusCrossing: return "SingularLocusCrossing";
    case ErrorCode::OracleMismatch: return "OracleMismatch";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace polygauss
