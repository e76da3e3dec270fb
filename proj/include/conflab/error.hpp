#pragma once

#include <stdexcept>
#include <string>

namespace conflab {

enum class ErrorCode {
  PoleSingularity,
  InconsistentAtlas,
  ResolutionTooCoarse,
  NonPositiveScale,
  SolverDivergence,
  DegenerateSource,
  InvalidExponent,
  HypothesisViolated,
  EmptyFamily,
  MassDeficient,
  InvalidArgument,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PoleSingularity: return "PoleSingularity";
    case ErrorCode::InconsistentAtlas: return "InconsistentAtlas";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::SolverDivergence: return "SolverDivergence";
    case ErrorCode::DegenerateSource: return "DegenerateSource";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::MassDeficient: return "MassDeficient";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `value()` carries an optional number
/// attached to the condition (total area for MassDeficient, max usable k for
/// ResolutionTooCoarse, needed grid size for InconsistentAtlas).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, double value = 0.0)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  double value_;
};

}  // namespace conflab
