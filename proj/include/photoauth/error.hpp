#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace photoauth {

enum class ErrorCode {
  InvalidBox,
  BoxOutOfBounds,
  NoHostname,
  InvalidLabel,
  EncodingOverflow,
  InvalidState,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidBox: return "invalid-box";
    case ErrorCode::BoxOutOfBounds: return "box-out-of-bounds";
    case ErrorCode::NoHostname: return "no-hostname";
    case ErrorCode::InvalidLabel: return "invalid-label";
    case ErrorCode::EncodingOverflow: return "encoding-overflow";
    case ErrorCode::InvalidState: return "invalid-state";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ParseError: return "parse-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries a stable code so callers
/// (the HTTP layer in particular) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace photoauth
