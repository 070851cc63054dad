#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eisenhart {

enum class ErrorCode {
  NonFinite,
  SyntaxError,
  UnknownIdentifier,
  UnboundVariable,
  FieldEvalError,
  AsymmetricMetric,
  SingularMetric,
  SingularJacobian,
  NonPositiveUdot,
  ZeroUdot,
  StepLimitExceeded,
  BlowUp,
  MonotonicityViolation,
  OverdampedUnsupported,
  DimensionMismatch,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Recoverable failure raised by every module of the library.
///
/// `offset()` is a byte offset into expression source text when the error
/// originates in the expression layer, and `npos` otherwise.
class Error : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Error(ErrorCode code, const std::string& message, std::size_t offset = npos)
      : std::runtime_error(message), code_(code), offset_(offset) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t offset() const noexcept { return offset_; }

  /// True for errors caused by malformed input rather than numerics.
  bool is_config_error() const noexcept;

 private:
  ErrorCode code_;
  std::size_t offset_;
};

namespace detail {
[[noreturn]] void hard_fault(const char* what, const char* file, int line);
}  // namespace detail

}  // namespace eisenhart

// Programming errors (dimension mismatch, broken invariants) abort.
#define EISENHART_ASSERT(cond, what)                                   \
  do {                                                                 \
    if (!(cond)) ::eisenhart::detail::hard_fault(what, __FILE__, __LINE__); \
  } while (false)

#include <functional>

namespace eisenhart {

/// Receives non-fatal diagnostics (for example a nearly singular h block).
using WarningHandler = std::function<void(std::string_view)>;

/// Installs `handler` and returns the previous one. An empty handler
/// silences warnings. The default writes to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace eisenhart
