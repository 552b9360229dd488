#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fixcalc {

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  NonFinite,
  ZeroMap,
  MissingNorm,
  CompositionUncertified,
  MissingFixedPoints,
  PreconditionViolated,
  NotFound,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fixcalc
