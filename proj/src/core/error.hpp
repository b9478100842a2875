#pragma once

#include <stdexcept>
#include <string>

namespace fopdg {

enum class ErrorCode {
  ok = 0,
  invalid_argument,
  io,
  parse,
  singular_steering,
  non_finite,
  integrator_failure,
  sampling_exhausted,
  training_failure,
  no_convergence,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::singular_steering: return "singular_steering";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::integrator_failure: return "integrator_failure";
    case ErrorCode::sampling_exhausted: return "sampling_exhausted";
    case ErrorCode::training_failure: return "training_failure";
    case ErrorCode::no_convergence: return "no_convergence";
  }
  return "unknown";
}

}  // namespace fopdg
