#ifndef MPRK_ERROR_HPP
#define MPRK_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mprk {

enum class ErrorCode {
  SignPatternViolation,
  NotConservative,
  NonPositiveInput,
  NumericalBreakdown,
  SingularSystem,
  InvalidParameter,
  DegenerateSteadyState,
  NotASteadyState,
  DomainError,
  BracketFailure,
  EvaluationFailure,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SignPatternViolation: return "SignPatternViolation";
    case ErrorCode::NotConservative: return "NotConservative";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DegenerateSteadyState: return "DegenerateSteadyState";
    case ErrorCode::NotASteadyState: return "NotASteadyState";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
  }
  return "Unknown";
}

/// Thrown by every library operation that can fail; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures that originate in floating-point evaluation rather than bad input.
  bool is_numerical() const noexcept {
    return code_ == ErrorCode::NumericalBreakdown || code_ == ErrorCode::SingularSystem ||
           code_ == ErrorCode::BracketFailure || code_ == ErrorCode::EvaluationFailure;
  }

 private:
  ErrorCode code_;
};

}  // namespace mprk

#endif  // MPRK_ERROR_HPP
