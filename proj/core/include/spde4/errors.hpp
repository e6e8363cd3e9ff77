#pragma once

#include <stdexcept>
#include <string>

namespace spde4 {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or malformed input (bad grid, negative time, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical guard refused to run: spectral cutoff too small for the
/// requested accuracy, dof count above a memory threshold, quadrature not
/// converged.
class GuardRefusal : public Error {
 public:
  using Error::Error;
};

/// Linear solver failure (factorization breakdown, iterative non-convergence).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace spde4
