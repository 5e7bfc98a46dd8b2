#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fraclab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid grid, mesh, problem or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a singular point of a closed form.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Requested quantity has no implementation for the given input.
class NotAvailableError : public Error {
 public:
  using Error::Error;
};

/// Radii or regions that do not fit inside the grid.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Iterative method hit its cap; carries the last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(format(what, residual, iterations)),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  static std::string format(const std::string& what, double residual, int iterations) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " (residual %.3e after %d iterations)", residual, iterations);
    return what + buf;
  }

  double residual_;
  int iterations_;
};

}  // namespace fraclab
