#include "regime_graph/error.hpp"

namespace regime_graph {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::TooFewSegments: return "TooFewSegments";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::ZeroVarianceSeries: return "ZeroVarianceSeries";
    case ErrorCode::NoFeasibleInterval: return "NoFeasibleInterval";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::NodeSetMismatch: return "NodeSetMismatch";
    case ErrorCode::InvalidLoadings: return "InvalidLoadings";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace regime_graph
