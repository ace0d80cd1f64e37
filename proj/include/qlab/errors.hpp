#pragma once

#include <stdexcept>
#include <string>

namespace qlab {

// Root of the library error hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: schema mismatches, broken type invariants, out-of-range
// values. Messages name the offending field, rule, or row.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Data is structurally valid but cannot support the requested estimate
// (flat decay curve, collinear samples, ...).
class DegenerateDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Fewer inputs than the operation's arity floor.
class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Filesystem problems (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qlab
