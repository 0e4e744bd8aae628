#pragma once

#include <stdexcept>
#include <string>

namespace darwin {

/// Base for every error raised by the library. Callers that only care about
/// "physics failed" vs "bad input" can catch the two intermediate classes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or malformed input data (exit code 2 in the CLI).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A well-formed request that failed during computation (exit code 1 in the CLI).
class ComputationError : public Error {
 public:
  using Error::Error;
};

class ProximityError : public ComputationError {
 public:
  ProximityError(std::size_t i, std::size_t j, double distance, double r_min)
      : ComputationError("particles " + std::to_string(i) + " and " + std::to_string(j) +
                         " are closer than r_min (|r_ij| = " + std::to_string(distance) +
                         ", r_min = " + std::to_string(r_min) + ")"),
        first(i),
        second(j) {}
  ProximityError(const std::string& what) : ComputationError(what) {}

  std::size_t first = 0;
  std::size_t second = 0;
};

class IntegrationError : public ComputationError {
 public:
  IntegrationError(std::size_t step, const std::string& what)
      : ComputationError("step " + std::to_string(step) + ": " + what), step_index(step) {}

  std::size_t step_index;
};

/// The q = 0 Fourier mode was requested from an interaction that excludes it.
class ExcludedModeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class CapacityError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class SolverError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

/// Raised for omega = 0 where a response formula carries an explicit 1/omega.
class StaticLimitError : public InvalidArgument {
 public:
  explicit StaticLimitError(const std::string& what)
      : InvalidArgument(what + " (omega = 0 is singular; use dc_extrapolate on a sampled frequency sequence)") {}
};

class NonphysicalModelError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class DivergenceError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class ResonanceError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace darwin
