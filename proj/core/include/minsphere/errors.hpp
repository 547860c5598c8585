#pragma once

#include <stdexcept>
#include <string>

namespace minsphere {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A request would exceed a memory or size guard.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Quadrature, root finding or eigen-solving failed to reach tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Degenerate geometry (zero-area faces, branch elements, ...).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a structural invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace minsphere
