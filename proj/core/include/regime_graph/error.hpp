#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace regime_graph {

enum class ErrorCode {
  EmptyInput,
  NonPositivePrice,
  TooShort,
  WindowTooShort,
  SeriesTooShort,
  TooFewSegments,
  InsufficientOverlap,
  ZeroVarianceSeries,
  NoFeasibleInterval,
  OutOfRange,
  NotATree,
  NodeSetMismatch,
  InvalidLoadings,
  InvalidArgument,
  ParseError,
  IoError,
};

std::string_view error_name(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above; the CLI
// maps this type to exit status 1.
class DomainError : public std::runtime_error {
 public:
  DomainError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace regime_graph
