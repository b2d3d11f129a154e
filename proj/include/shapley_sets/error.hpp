#ifndef SHAPLEY_SETS_ERROR_HPP
#define SHAPLEY_SETS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace shapsets {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validation failures. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Raised when a regularized covariance block cannot be factorized.
class SingularityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FitError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Enumeration requested beyond the supported player count (exit code 3).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written (exit code 4).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace shapsets

#endif  // SHAPLEY_SETS_ERROR_HPP
