#pragma once

#include <stdexcept>
#include <string>

namespace csk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on numeric arguments or shapes was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or missing run configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (CLI exit code 3). Messages name file, row and column.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace csk
