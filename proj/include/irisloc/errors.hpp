#pragma once

#include <stdexcept>
#include <string>

namespace irisloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed PGM mask data.
class CodecError : public Error {
 public:
  using Error::Error;
};

/// Two images that must share dimensions do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// No iris or pupil pixels to localize.
class EmptyEye : public Error {
 public:
  using Error::Error;
};

/// Too few points, or points that do not determine a circle.
class DegenerateFit : public Error {
 public:
  DegenerateFit(const std::string& what, double condition)
      : Error(what), condition_(condition) {}

  /// Condition number of the normal matrix (infinity when singular).
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// The Hough accumulator had no peak with sufficient perimeter support.
class NoCircle : public Error {
 public:
  using Error::Error;
};

/// Invalid arguments or configuration values.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Annotation, manifest, CSV or directory layout problems.
class IngestError : public Error {
 public:
  using Error::Error;
};

/// Statistics requested over an empty or unusable set.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace irisloc
