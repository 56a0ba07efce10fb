#pragma once

#include <stdexcept>
#include <string>

namespace vct {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an invalid argument, configuration, or violated a precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A file exists but its content does not follow the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing the filesystem failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input is well formed but the requested quantity is undefined for it
/// (empty masks, isotropic covariance, zero variance, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace vct
