#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace biex {

enum class ErrorCode {
  invalid_argument,
  invalid_configuration,
  integration_failure,
  config_syntax,
  config_invalid,
  config_unknown_key,
  io_error,
};

/// Stable, machine-readable names; these appear verbatim in CLI error output.
constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_configuration: return "invalid-configuration";
    case ErrorCode::integration_failure: return "integration-failure";
    case ErrorCode::config_syntax: return "config-syntax";
    case ErrorCode::config_invalid: return "config-invalid";
    case ErrorCode::config_unknown_key: return "config-unknown-key";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

/// Library-wide exception. `field` carries a dotted config path (or a file
/// path for IO errors) when one is meaningful.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

namespace detail {

inline void require(bool condition, const std::string& message,
                    std::string field = {},
                    ErrorCode code = ErrorCode::invalid_argument) {
  if (!condition) throw Error(code, message, std::move(field));
}

}  // namespace detail
}  // namespace biex
