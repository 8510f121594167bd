#pragma once

#include <stdexcept>
#include <string>

namespace cglab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid macroscopic shape, dimension mismatch, or an empty lattice set.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A field or argument violates an operator precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// A time integrator produced NaN/Inf, or an energy increase above tolerance.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, long long step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}

  long long step() const noexcept { return step_; }

 private:
  long long step_;
};

/// Surface tension evaluation outside the supported tilt range, or a bad backend.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Configuration parse or validation failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cglab
