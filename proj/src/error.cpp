#include "spheresteer/error.hpp"

namespace spheresteer {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::DegenerateAnchors: return "DegenerateAnchors";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NegativeAmplitude: return "NegativeAmplitude";
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

}  // namespace spheresteer
