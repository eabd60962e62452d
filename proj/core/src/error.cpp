#include "noxcast/error.hpp"

namespace noxcast {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::BadTimestamp: return "BadTimestamp";
    case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientCompleteRows: return "InsufficientCompleteRows";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::UnfittedModel: return "UnfittedModel";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::AllDiverged: return "AllDiverged";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownCommand:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyGrid:
      return ErrorCategory::Config;
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::Diverged:
    case ErrorCode::AllDiverged:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace noxcast
