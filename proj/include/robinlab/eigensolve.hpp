#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "robinlab/discretize.hpp"

namespace robinlab {

enum class SolverMethod {
  Auto,         // shift-invert, dense fallback on failure when size <= 2000
  ShiftInvert,  // shift-invert only
  Dense,        // dense diagonalization
};

struct SolverOptions {
  int k = 4;
  double tol = 1e-10;
  SolverMethod method = SolverMethod::Auto;
  int max_restarts = 500;
  /// Cross-check the computed set with an inertia count and hunt for
  /// eigenvalues a single Krylov sequence can miss (exact multiplicities).
  bool verify_completeness = true;
  /// Default: crude_lower_bound(sigma_hat) - 1, below the whole spectrum.
  std::optional<double> shift;
  std::uint64_t seed = 0x243f6a8885a308d3ULL;
};

struct SpectralResult {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // unit columns, matrix basis
  std::vector<double> residuals;    // ||A v - lambda v||
  std::vector<bool> converged;
  int negative_count = 0;           // among the computed eigenvalues
  std::string method;
  double shift = 0.0;
  int restarts = 0;
};

/// Largest dimension for which the dense fallback is attempted.
inline constexpr Eigen::Index kDenseFallbackLimit = 2000;

/// k algebraically smallest eigenpairs of the form.
///
/// Shift-invert Lanczos with thick restarts on (A - s I)^{-1}, s below the
/// spectrum so the shifted matrix has a Cholesky factor that is computed
/// once. Restart subspace max(2k + 10, 30), budget max_restarts. Throws
/// ConvergenceError (with the best residuals) or FactorizationError.
SpectralResult lowest_eigenpairs(const DiscreteForm& form, const SolverOptions& options = {});

/// Same on a raw symmetric matrix with an explicit shift below its spectrum.
SpectralResult lowest_eigenpairs(const SparseMatrix& A, double shift, const SolverOptions& options);

/// Full dense diagonalization, k lowest pairs.
SpectralResult dense_eigenpairs(const SparseMatrix& A, int k);

/// Number of eigenvalues strictly below tau from the signs of the LDL^T
/// pivots of A - tau I (Sylvester's law of inertia). Throws ZeroPivotError
/// when a pivot vanishes to working precision.
int count_below(const SparseMatrix& A, double tau);
int count_below(const DiscreteForm& form, double tau);

/// count_below, nudging tau upward by 1e-10 (1 + |tau|) on a vanishing pivot.
int count_below_perturbed(const SparseMatrix& A, double tau);

/// ||A v - lambda v||_2.
double residual(const SparseMatrix& A, double lambda, const Vector& v);
double residual(const DiscreteForm& form, double lambda, const Vector& v);

}  // namespace robinlab
