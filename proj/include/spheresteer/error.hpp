#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spheresteer {

enum class ErrorCode {
  DegenerateDirection,
  DegenerateScale,
  DegenerateAnchors,
  ShapeMismatch,
  BadLabel,
  NonFinite,
  NegativeAmplitude,
  InvalidRotation,
  InvalidArgument,
  ParseError,
  SchemaMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace spheresteer
