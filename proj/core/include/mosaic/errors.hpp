#pragma once

#include <stdexcept>
#include <string>

namespace mosaic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed configuration, schema, or an invalid argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that parses but violates a dataset invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Missing files, unwritable directories, truncated artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A factorization or other numerical routine that could not be completed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mosaic
