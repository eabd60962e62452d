#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noxcast {

enum class ErrorCode {
  // ingest
  UnreadableFile,
  MalformedHeader,
  BadTimestamp,
  DuplicateTimestamp,
  EmptyInput,
  // impute
  InsufficientCompleteRows,
  SingularDesign,
  UnfittedModel,
  SchemaMismatch,
  // dataset
  DegenerateRange,
  SeriesTooShort,
  // nn / train
  ShapeMismatch,
  NonFiniteInput,
  EmptyBatch,
  NonFiniteLoss,
  Diverged,
  // eval
  LengthMismatch,
  ConstantSeries,
  ZeroVariance,
  TooShort,
  // sweep
  EmptyGrid,
  AllDiverged,
  // cli / general
  InvalidArgument,
  ConfigError,
  UnknownCommand,
};

/// Broad failure class, used by the CLI to pick an exit status.
enum class ErrorCategory { Config, Data, Numeric };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Ingest failure tied to a 1-based line of the input file (header = line 1).
class RowError : public Error {
 public:
  RowError(ErrorCode code, std::size_t row, const std::string& message)
      : Error(code, "row " + std::to_string(row) + ": " + message), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Configuration failure naming the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& reason)
      : Error(ErrorCode::ConfigError, field + ": " + reason), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace noxcast
