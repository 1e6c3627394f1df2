#include "instructkit/error.hpp"

namespace instructkit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateDatasetId: return "DuplicateDatasetId";
    case ErrorKind::InvalidLabelSpace: return "InvalidLabelSpace";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::LabelOutsideSpace: return "LabelOutsideSpace";
    case ErrorKind::UnmappableLabel: return "UnmappableLabel";
    case ErrorKind::InvalidRatios: return "InvalidRatios";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MissingTaskDefinition: return "MissingTaskDefinition";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::EmptyGeneration: return "EmptyGeneration";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::EmptyPool: return "EmptyPool";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnknownPositiveLabel: return "UnknownPositiveLabel";
    case ErrorKind::MetricTaskMismatch: return "MetricTaskMismatch";
    case ErrorKind::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorKind::MissingPrerequisite: return "MissingPrerequisite";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

ErrorCategory category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidRatios:
      return ErrorCategory::config;
    case ErrorKind::MissingPrerequisite:
    case ErrorKind::MissingFile:
      return ErrorCategory::missing_prerequisite;
    case ErrorKind::TransportError:
    case ErrorKind::AuthError:
    case ErrorKind::MalformedResponse:
      return ErrorCategory::transport;
    default:
      return ErrorCategory::data;
  }
}

}  // namespace instructkit
