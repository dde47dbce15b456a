#pragma once

#include <stdexcept>
#include <string>

namespace pspline {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: dimensions, orders, parameters out of range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The data cannot support the requested model (too few distinct x, etc.).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not deliver a trustworthy result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidDimensions : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidOrder : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class OutOfDomain : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateData : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateKnots : public DataError {
 public:
  using DataError::DataError;
};

class RankDeficientDesign : public DataError {
 public:
  using DataError::DataError;
};

class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(long pivot)
      : NumericalError("matrix is not numerically positive definite (pivot " +
                       std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

class SingularFactor : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MaxIterationsExceeded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroDerivative : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FactorizationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericallyUnsolvable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateEdf : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ApproximationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AllPointsFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TooFewSamples : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace pspline
