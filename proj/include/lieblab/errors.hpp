#pragma once

#include <stdexcept>
#include <string>

namespace lieblab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Field length does not match the lattice.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Input violates a documented invariant (bad weights, negative mu, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Many-body basis exceeds the dense-solver guard.
class CapacityError : public Error {
public:
  using Error::Error;
};

/// Caller broke an operation's precondition that is not a plain input check,
/// e.g. passing an unaligned degenerate basis.
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// Eigensolver result failed its residual or orthonormality check.
class SolverError : public Error {
public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Excitation gap too small to form a response kernel.
class SingularGapError : public Error {
public:
  using Error::Error;
};

/// Ground state is degenerate where a non-degenerate one was required.
class DegenerateGroundState : public Error {
public:
  using Error::Error;
};

/// Projected perturbation leaves the degenerate manifold unsplit.
class SlopeDegenerate : public Error {
public:
  using Error::Error;
};

}  // namespace lieblab
