#include "krescale/error.hpp"

namespace krescale {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyShape: return "EmptyShape";
    case ErrorCode::BadRank: return "BadRank";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::TrailingBytes: return "TrailingBytes";
    case ErrorCode::BadScale: return "BadScale";
    case ErrorCode::BadMethod: return "BadMethod";
    case ErrorCode::FrequencyOutOfRange: return "FrequencyOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DegenerateAmplitude: return "DegenerateAmplitude";
    case ErrorCode::BadFraction: return "BadFraction";
    case ErrorCode::ChannelMismatch: return "ChannelMismatch";
    case ErrorCode::EmptyOutput: return "EmptyOutput";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownLayerKind: return "UnknownLayerKind";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::NoSpatialFc: return "NoSpatialFc";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(ErrorCode code, std::size_t line, const std::string& message)
    : Error(code, line == 0 ? message : "line " + std::to_string(line) + ": " + message),
      line_(line) {}

}  // namespace krescale
