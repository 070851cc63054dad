#include "eisenhart/error.hpp"

#include <cstdio>
#include <cstdlib>

namespace eisenhart {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::FieldEvalError: return "FieldEvalError";
    case ErrorCode::AsymmetricMetric: return "AsymmetricMetric";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::NonPositiveUdot: return "NonPositiveUdot";
    case ErrorCode::ZeroUdot: return "ZeroUdot";
    case ErrorCode::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::OverdampedUnsupported: return "OverdampedUnsupported";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool Error::is_config_error() const noexcept {
  switch (code_) {
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::UnboundVariable:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::OverdampedUnsupported:
      return true;
    default:
      return false;
  }
}

namespace detail {
void hard_fault(const char* what, const char* file, int line) {
  std::fprintf(stderr, "eisenhart: fatal: %s (%s:%d)\n", what, file, line);
  std::abort();
}
}  // namespace detail

}  // namespace eisenhart

#include <iostream>
#include <mutex>

namespace eisenhart {
namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) { std::cerr << "eisenhart: warning: " << msg << '\n'; };
  return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  std::swap(handler, warning_handler());
  return handler;
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

}  // namespace eisenhart
