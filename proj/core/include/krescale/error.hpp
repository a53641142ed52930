#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace krescale {

enum class ErrorCode {
  ShapeMismatch,
  EmptyShape,
  BadRank,
  NonFinite,
  DuplicateName,
  IoFailure,
  BadMagic,
  UnsupportedVersion,
  Truncated,
  TrailingBytes,
  BadScale,
  BadMethod,
  FrequencyOutOfRange,
  IndexOutOfRange,
  DegenerateAmplitude,
  BadFraction,
  ChannelMismatch,
  EmptyOutput,
  GridMismatch,
  ParseError,
  UnknownLayerKind,
  ShapeError,
  NoSpatialFc,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Manifest parse failures also remember the 1-based line they came from
// (0 when the failure is not tied to a line, e.g. empty text).
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace krescale
