#pragma once

#include <stdexcept>
#include <string>

namespace senserf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Series or quadrature did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Requested image rejection ratio is above the supremum for the phase mismatch.
class InfeasibleIrrError : public Error {
 public:
  using Error::Error;
};

// A distortion-variance formula produced a negative variance.
class NegativeVarianceError : public Error {
 public:
  using Error::Error;
};

class ModelInconsistencyError : public Error {
 public:
  using Error::Error;
};

// Phase-noise leakage requested with a zero oscillator bandwidth.
class DegenerateDeltaError : public Error {
 public:
  using Error::Error;
};

// Enumeration too large to perform exactly.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace senserf
