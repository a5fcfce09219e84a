#include "mvlang/error.hpp"

namespace mvlang {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DuplicateLanguage: return "DuplicateLanguage";
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::NoCommonLanguages: return "NoCommonLanguages";
    case ErrorKind::DegenerateVector: return "DegenerateVector";
    case ErrorKind::DegenerateView: return "DegenerateView";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::NoCorrelatedDimensions: return "NoCorrelatedDimensions";
    case ErrorKind::ModelFormatError: return "ModelFormatError";
    case ErrorKind::NewickParseError: return "NewickParseError";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::InvalidTree: return "InvalidTree";
    case ErrorKind::InvalidSampleSize: return "InvalidSampleSize";
    case ErrorKind::UnknownLanguage: return "UnknownLanguage";
    case ErrorKind::MissingMetadata: return "MissingMetadata";
    case ErrorKind::UndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace mvlang
