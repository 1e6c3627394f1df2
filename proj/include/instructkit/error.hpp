#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace instructkit {

/// Every failure the library reports. The CLI maps these onto exit codes
/// through `category()`.
enum class ErrorKind {
  // corpus
  MissingFile,
  ParseError,
  DuplicateDatasetId,
  InvalidLabelSpace,
  UnknownColumn,
  LabelOutsideSpace,
  // preprocess
  UnmappableLabel,
  InvalidRatios,
  EmptyInput,
  // instructgen
  MissingTaskDefinition,
  TransportError,
  MalformedResponse,
  AuthError,
  EmptyGeneration,
  InvariantViolation,
  // assemble
  EmptyPool,
  IoError,
  // metrics
  LengthMismatch,
  UnknownPositiveLabel,
  MetricTaskMismatch,
  // report
  AllZeroDifferences,
  // cli
  MissingPrerequisite,
  ConfigError,
};

enum class ErrorCategory { config, missing_prerequisite, data, transport };

std::string_view to_string(ErrorKind kind);
ErrorCategory category(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace instructkit
