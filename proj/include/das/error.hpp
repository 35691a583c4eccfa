#pragma once

#include <stdexcept>
#include <string>

namespace das {

/// Broad failure class; the CLI maps each to its exit code.
enum class ErrorKind { Validation, Numerical, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct CycleDetected : ValidationError {
  explicit CycleDetected(const std::string& what) : ValidationError("cycle detected: " + what) {}
};

struct DimensionMismatch : ValidationError {
  explicit DimensionMismatch(const std::string& what) : ValidationError("dimension mismatch: " + what) {}
};

struct InsufficientSamples : ValidationError {
  explicit InsufficientSamples(const std::string& what) : ValidationError("insufficient samples: " + what) {}
};

struct NumericalFailure : Error {
  explicit NumericalFailure(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace das
