#pragma once

#include <stdexcept>
#include <string>

namespace uavpheno {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or configuration value is outside its documented range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data is missing, unreadable, malformed or has the wrong shape.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: non-convergence, degenerate geometry,
/// empty clusters.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace uavpheno
