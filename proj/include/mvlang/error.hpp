#pragma once

#include <stdexcept>
#include <string>

namespace mvlang {

// Every failure the library reports, one kind per contract violation.
enum class ErrorKind {
  DuplicateLanguage,
  MalformedInput,
  NoCommonLanguages,
  DegenerateVector,
  DegenerateView,
  DimensionMismatch,
  TooFewSamples,
  SingularCovariance,
  NoCorrelatedDimensions,
  ModelFormatError,
  NewickParseError,
  InvalidK,
  InvalidTree,
  InvalidSampleSize,
  UnknownLanguage,
  MissingMetadata,
  UndefinedCorrelation,
  InvalidArgument,
  IoError,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace mvlang
