#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace robinlab {

/// Base of every error raised by the library. Contract violations (bad
/// arguments) use the standard std::invalid_argument / std::domain_error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The quantity asked for does not exist for this potential (e.g. the
/// integral of a nonzero constant).
class NotIntegrableError : public Error {
 public:
  using Error::Error;
};

/// An estimate was requested for a sigma outside its hypotheses.
class InapplicableError : public Error {
 public:
  enum class Reason {
    NotAttractiveOnAverage,
    EssentialBottomNotZero,
    InfiniteSupport,
    CouplingTooStrong,
  };

  InapplicableError(Reason reason, const std::string& what)
      : Error(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

/// Iterative eigensolver ran out of its restart budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_residuals)
      : Error(what), best_residuals_(std::move(best_residuals)) {}

  const std::vector<double>& best_residuals() const noexcept {
    return best_residuals_;
  }

 private:
  std::vector<double> best_residuals_;
};

/// A sparse factorization hit a zero or non-positive pivot.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Inertia count at a threshold that coincides with an eigenvalue.
class ZeroPivotError : public FactorizationError {
 public:
  using FactorizationError::FactorizationError;
};

/// Richardson differences are not monotone.
class NoAsymptoticRegimeError : public Error {
 public:
  using Error::Error;
};

/// Decay fit window reaches values below the floating-point floor.
class UnderflowWindowError : public Error {
 public:
  using Error::Error;
};

}  // namespace robinlab
