#pragma once

#include <stdexcept>
#include <string>

namespace nsnr {

// Base class for every failure this library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input matrix is too far from symmetric to be silently repaired.
class NotSymmetricError : public Error {
 public:
  using Error::Error;
};

// Matrix fails the (relative) positive-definiteness gate, or a Cholesky
// pivot went non-positive.
class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

// Iterative decomposition did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Statistically degenerate input (zero vector, constant series, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A trial kept producing singular estimates past the redraw cap.
class EstimatorSingularError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nsnr
