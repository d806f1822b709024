#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bvpcont {

enum class ErrorCode {
  InvalidArgument,
  DegenerateGrid,
  SingularSystem,
  NonFinite,
  SingularJacobian,
  NoDescent,
  UnresolvedBranch,
  NoSignChange,
  ZeroOnBoundary,
  UnresolvedAngleStep,
  SignConditionViolated,
  BracketNotFound,
  HypothesisFailed,
  NoSolutionFound,
  PositivityViolation,
  NonFiniteState,
  NoConvergence,
  ScanExhausted,
  EmptyInput,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// that callers (the CLI in particular) can map outcomes to exit statuses.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::NoDescent: return "NoDescent";
    case ErrorCode::UnresolvedBranch: return "UnresolvedBranch";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::ZeroOnBoundary: return "ZeroOnBoundary";
    case ErrorCode::UnresolvedAngleStep: return "UnresolvedAngleStep";
    case ErrorCode::SignConditionViolated: return "SignConditionViolated";
    case ErrorCode::BracketNotFound: return "BracketNotFound";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::NoSolutionFound: return "NoSolutionFound";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ScanExhausted: return "ScanExhausted";
    case ErrorCode::EmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

}  // namespace bvpcont
