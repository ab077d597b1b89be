#pragma once

#include <stdexcept>
#include <string>

namespace opsurv {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad option values, inconsistent shapes, unknown keys.
struct ConfigError : Error {
  using Error::Error;
};

/// Problems with input data: unreadable files, malformed rows, schema mismatch.
struct DataError : Error {
  using Error::Error;
};

/// An argument outside the mathematical domain of an operation
/// (negative time, degree above cap, event index out of range).
struct DomainError : Error {
  using Error::Error;
};

/// A quantity became degenerate at runtime: all-zero coefficient row,
/// survival below the hazard floor, undefined metric, non-finite gradient.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace opsurv
