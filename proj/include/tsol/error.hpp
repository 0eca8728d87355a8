#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsol {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  BoundaryProximity,
  NotGraphical,
  InsufficientExtent,
  WindowTooSmall,
  NonPositiveCurvature,
  Numerical,
};

std::string_view to_string(ErrorKind kind);

/// Exception type thrown by every operation in the toolkit. The kind lets
/// callers (and the CLI exit-code mapping) distinguish contract violations
/// from numerical failures without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, std::string_view what) {
  if (!condition) fail(kind, std::string(what));
}

}  // namespace tsol
