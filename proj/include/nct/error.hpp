#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nct {

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  NotSelfAdjoint,
  NotPositive,
  Singular,
  Tolerance,
  ResourceCap,
  MarginExhausted,
  Config,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Structured failure raised by every module. `diagnostic` carries the
/// number that triggered the failure when there is one (a minimum
/// eigenvalue, a residual, a condition estimate).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<double> diagnostic = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<double> diagnostic() const noexcept { return diagnostic_; }

 private:
  ErrorKind kind_;
  std::optional<double> diagnostic_;
};

}  // namespace nct
