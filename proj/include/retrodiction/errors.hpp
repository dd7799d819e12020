#pragma once

#include <stdexcept>
#include <string>

namespace retrodiction {

// Base for every error raised by the library. The CLI maps the two
// families below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a type invariant or precondition (bad shape, rows that do
// not sum to one, non-PSD POM element, unknown label, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// The computation itself failed on valid-looking input.
class ComputationError : public Error {
 public:
  using Error::Error;
};

// Conditioning on an outcome that cannot occur: the posterior is undefined.
class ZeroProbabilityError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class ConvergenceError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

// A computed probability fell outside [-tol, 1 + tol].
class NumericIntegrityError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

// A preparation POM was requested for a source that is not unbiased.
class BiasedSourceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace retrodiction
