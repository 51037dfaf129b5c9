#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace raytraj {

enum class Errc {
  // geometry
  ConventionMismatch,
  NonUnitAxis,
  InvalidRotation,
  InvalidIntrinsics,
  InvalidTrajectory,
  // pose files
  MissingHeader,
  FieldCount,
  Numeric,
  RotationInvalid,
  NonZeroDistortion,
  NonMonotonicTimestamp,
  IntrinsicsOutOfRange,
  IndexOutOfRange,
  Schema,
  // synthesis
  NonUnitDirection,
  NonPositiveScale,
  EmptyDirectives,
  InvalidArgument,
  // metrics
  LengthMismatch,
  DegenerateBaseline,
  // encoder
  IndivisibleDims,
  ShapeMismatch,
  InvalidConfig,
  // npy
  BadMagic,
  UnsupportedDtype,
  UnsupportedOrder,
  TruncatedPayload,
  BadHeader,
  Io,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ConventionMismatch: return "ConventionMismatch";
    case Errc::NonUnitAxis: return "NonUnitAxis";
    case Errc::InvalidRotation: return "InvalidRotation";
    case Errc::InvalidIntrinsics: return "InvalidIntrinsics";
    case Errc::InvalidTrajectory: return "InvalidTrajectory";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::FieldCount: return "FieldCountError";
    case Errc::Numeric: return "NumericError";
    case Errc::RotationInvalid: return "RotationInvalid";
    case Errc::NonZeroDistortion: return "NonZeroDistortion";
    case Errc::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case Errc::IntrinsicsOutOfRange: return "IntrinsicsOutOfRange";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::Schema: return "SchemaError";
    case Errc::NonUnitDirection: return "NonUnitDirection";
    case Errc::NonPositiveScale: return "NonPositiveScale";
    case Errc::EmptyDirectives: return "EmptyDirectives";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateBaseline: return "DegenerateBaseline";
    case Errc::IndivisibleDims: return "IndivisibleDims";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedDtype: return "UnsupportedDtype";
    case Errc::UnsupportedOrder: return "UnsupportedOrder";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::BadHeader: return "BadHeader";
    case Errc::Io: return "IoError";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. `code()` identifies
/// the failure kind; the message is meant for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Pose-file parse failure. `line` is 1-based; `column` is the 1-based field
/// index for numeric errors (0 otherwise); `found` is the field count for
/// FieldCountError.
class ParseError : public Error {
 public:
  ParseError(Errc code, std::size_t line, const std::string& detail, std::size_t column = 0,
             std::size_t found = 0)
      : Error(code, "line " + std::to_string(line) + ": " + detail),
        line_(line),
        column_(column),
        found_(found) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }
  [[nodiscard]] std::size_t found() const noexcept { return found_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::size_t found_;
};

/// JSON document does not match the expected schema. `path` is a JSON pointer.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, std::string reason)
      : Error(Errc::Schema, path + ": " + reason), path_(std::move(path)), reason_(std::move(reason)) {}

  [[nodiscard]] const std::string& path() const noexcept { return path_; }
  [[nodiscard]] const std::string& reason() const noexcept { return reason_; }

 private:
  std::string path_;
  std::string reason_;
};

}  // namespace raytraj
