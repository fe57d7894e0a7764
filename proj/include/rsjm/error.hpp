#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsjm {

enum class ErrorCode {
  invalid_argument,
  non_positive_omega,
  non_integer_order,
  window_too_small,
  out_of_window,
  tolerance_not_met,
  non_analytic_on_ray,
  denominator_vanished,
  genericity_violated,
  degenerate_at_one,
  degree_claim_violated,
  not_constant,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::non_positive_omega: return "non_positive_omega";
    case ErrorCode::non_integer_order: return "non_integer_order";
    case ErrorCode::window_too_small: return "window_too_small";
    case ErrorCode::out_of_window: return "out_of_window";
    case ErrorCode::tolerance_not_met: return "tolerance_not_met";
    case ErrorCode::non_analytic_on_ray: return "non_analytic_on_ray";
    case ErrorCode::denominator_vanished: return "denominator_vanished";
    case ErrorCode::genericity_violated: return "genericity_violated";
    case ErrorCode::degenerate_at_one: return "degenerate_at_one";
    case ErrorCode::degree_claim_violated: return "degree_claim_violated";
    case ErrorCode::not_constant: return "not_constant";
  }
  return "unknown";
}

/// Base exception for every failure raised by the library. The code is what
/// callers (the CLI in particular) dispatch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Genericity and degeneracy failures mark parameter points the theory
  /// excludes; they are not numerical failures.
  bool is_excluded_point() const noexcept {
    return code_ == ErrorCode::genericity_violated || code_ == ErrorCode::degenerate_at_one;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rsjm
