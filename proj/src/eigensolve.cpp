#include "robinlab/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "robinlab/certify.hpp"
#include "robinlab/errors.hpp"

namespace robinlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Portable deterministic uniforms in [-1, 1).
class StartVectors {
 public:
  explicit StartVectors(std::uint64_t seed) : engine_(seed) {}

  Vector next(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = static_cast<double>(engine_() >> 11) * 0x1.0p-52 - 1.0;
    }
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

class ShiftInvertOperator {
 public:
  ShiftInvertOperator(const SparseMatrix& A, double shift) {
    SparseMatrix shifted = A;
    for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) -= shift;
    llt_.compute(shifted);
    if (llt_.info() != Eigen::Success) {
      throw FactorizationError(fmt::format(
          "Cholesky factorization of A - ({}) I failed: the shift is not below the spectrum, "
          "choose a lower shift",
          shift));
    }
  }

  Vector apply(const Vector& x) const { return llt_.solve(x); }

 private:
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower> llt_;
};

// Removes the span of the orthonormal columns of Y, twice for stability.
void deflate(const Eigen::MatrixXd& Y, Vector& w) {
  if (Y.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= Y * (Y.transpose() * w);
}

struct RitzSet {
  std::vector<double> values;
  Eigen::MatrixXd vectors;
  std::vector<double> residuals;
  bool converged = false;
  int restarts = 0;
};

double matrix_scale(const SparseMatrix& A) {
  double norm = 0.0;
  Vector rowsum = Vector::Zero(A.rows());
  for (Eigen::Index c = 0; c < A.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) rowsum[it.row()] += std::abs(it.value());
  }
  if (rowsum.size() > 0) norm = rowsum.maxCoeff();
  return norm;
}

// Thick-restart Lanczos for the `want` largest eigenvalues of the shift-invert
// operator restricted to the orthogonal complement of `locked`. Ritz values
// are reported as Rayleigh quotients of A.
RitzSet thick_restart_lanczos(const SparseMatrix& A, const ShiftInvertOperator& op, int want,
                              const Eigen::MatrixXd& locked, const SolverOptions& options,
                              double residual_floor, StartVectors& starts) {
  const Eigen::Index n = A.rows();
  const Eigen::Index avail = n - locked.cols();
  want = static_cast<int>(std::min<Eigen::Index>(want, avail));
  const int m = static_cast<int>(std::min<Eigen::Index>(std::max(2 * want + 10, 30), avail));

  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);

  const auto fresh_direction = [&](int filled) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Vector v = starts.next(n);
      deflate(locked, v);
      for (int pass = 0; pass < 2; ++pass) {
        v.noalias() -= V.leftCols(filled) * (V.leftCols(filled).transpose() * v);
      }
      const double norm = v.norm();
      if (norm > 1e-8) return Vector(v / norm);
    }
    throw ConvergenceError("Lanczos could not extend the Krylov basis", {});
  };

  V.col(0) = fresh_direction(0);
  int kept = 0;
  double beta_last = 0.0;
  RitzSet out;

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    for (int j = kept; j < m; ++j) {
      Vector w = op.apply(V.col(j));
      deflate(locked, w);
      Vector coeffs = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * coeffs;
      const Vector again = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * again;
      coeffs += again;
      for (int i = 0; i <= j; ++i) {
        T(i, j) = coeffs[i];
        T(j, i) = coeffs[i];
      }
      const double beta = w.norm();
      const double scale = std::abs(coeffs[j]) + beta;
      if (beta <= 1e-13 * scale) {
        // Invariant subspace: continue with an unrelated direction.
        beta_last = 0.0;
        if (j + 1 < m || avail > m) V.col(j + 1) = fresh_direction(j + 1);
        else V.col(j + 1).setZero();
      } else {
        beta_last = beta;
        V.col(j + 1) = w / beta;
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(T);
    const Vector& theta = ritz.eigenvalues();
    const Eigen::MatrixXd& S = ritz.eigenvectors();

    // Largest theta first.
    const int keep = std::min(m - 1, want + (m - want) / 2);
    const int take = std::max(keep, want);
    Eigen::MatrixXd S_keep(m, take);
    for (int c = 0; c < take; ++c) S_keep.col(c) = S.col(m - 1 - c);

    Eigen::MatrixXd Y = V.leftCols(m) * S_keep.leftCols(want);
    out.values.assign(static_cast<std::size_t>(want), 0.0);
    out.residuals.assign(static_cast<std::size_t>(want), 0.0);
    bool all_converged = true;
    for (int c = 0; c < want; ++c) {
      Vector y = Y.col(c);
      y.normalize();
      const Vector Ay = A * y;
      const double lambda = y.dot(Ay);
      const double r = (Ay - lambda * y).norm();
      Y.col(c) = y;
      out.values[static_cast<std::size_t>(c)] = lambda;
      out.residuals[static_cast<std::size_t>(c)] = r;
      if (r > std::max(options.tol * (1.0 + std::abs(lambda)), residual_floor)) all_converged = false;
    }
    out.vectors = std::move(Y);
    out.restarts = restart;
    if (all_converged || m == avail) {
      out.converged = all_converged;
      return out;
    }
    if (restart == options.max_restarts) break;

    // Thick restart: keep the best Ritz vectors plus the residual direction;
    // the projected matrix becomes an arrowhead.
    Eigen::MatrixXd kept_basis = V.leftCols(m) * S_keep.leftCols(keep);
    V.leftCols(keep) = kept_basis;
    V.col(keep) = V.col(m);
    T.setZero();
    for (int c = 0; c < keep; ++c) {
      T(c, c) = theta[m - 1 - c];
      const double coupling = beta_last * S(m - 1, m - 1 - c);
      T(c, keep) = coupling;
      T(keep, c) = coupling;
    }
    kept = keep;
  }
  out.converged = false;
  return out;
}

SpectralResult finish(std::vector<double> values, Eigen::MatrixXd vectors,
                      std::vector<double> residuals, std::vector<bool> converged) {
  SpectralResult r;
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  r.eigenvectors.resize(vectors.rows(), static_cast<Eigen::Index>(order.size()));
  for (std::size_t c = 0; c < order.size(); ++c) {
    r.eigenvalues.push_back(values[order[c]]);
    r.residuals.push_back(residuals[order[c]]);
    r.converged.push_back(converged[order[c]]);
    r.eigenvectors.col(static_cast<Eigen::Index>(c)) = vectors.col(static_cast<Eigen::Index>(order[c]));
  }
  r.negative_count = static_cast<int>(std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(),
                                                    [](double e) { return e < 0.0; }));
  return r;
}

SpectralResult shift_invert(const SparseMatrix& A, double shift, const SolverOptions& options) {
  const Eigen::Index n = A.rows();
  const int k = static_cast<int>(std::min<Eigen::Index>(options.k, n));
  const ShiftInvertOperator op(A, shift);
  const double floor = 50.0 * kEps * matrix_scale(A);
  StartVectors starts(options.seed);

  std::vector<double> values;
  std::vector<double> residuals;
  Eigen::MatrixXd vectors(n, 0);
  int restarts = 0;

  const auto absorb = [&](const RitzSet& set) {
    restarts += set.restarts;
    if (!set.converged) {
      throw ConvergenceError(
          fmt::format("shift-invert Lanczos did not converge in {} restarts", options.max_restarts),
          set.residuals);
    }
    const Eigen::Index old = vectors.cols();
    vectors.conservativeResize(n, old + set.vectors.cols());
    vectors.rightCols(set.vectors.cols()) = set.vectors;
    values.insert(values.end(), set.values.begin(), set.values.end());
    residuals.insert(residuals.end(), set.residuals.begin(), set.residuals.end());
  };

  absorb(thick_restart_lanczos(A, op, k, vectors, options, floor, starts));

  if (options.verify_completeness && k < n) {
    for (int round = 0;; ++round) {
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      const double top = sorted[static_cast<std::size_t>(k - 1)];
      const double worst = *std::max_element(residuals.begin(), residuals.end());
      const double tau = top + 1e-8 * (1.0 + std::abs(top)) + 10.0 * worst;
      const int expected = count_below_perturbed(A, tau);
      const int found = static_cast<int>(
          std::count_if(values.begin(), values.end(), [&](double e) { return e < tau; }));
      if (found == expected) break;
      if (found > expected || round == 4 || vectors.cols() >= n) {
        throw ConvergenceError(
            fmt::format("inertia reports {} eigenvalues below {}, Lanczos found {}", expected, tau,
                        found),
            residuals);
      }
      absorb(thick_restart_lanczos(A, op, expected - found + 2, vectors, options, floor, starts));
    }
  }

  std::vector<bool> flags(values.size(), true);
  SpectralResult r = finish(std::move(values), std::move(vectors), std::move(residuals),
                            std::move(flags));
  r.eigenvalues.resize(static_cast<std::size_t>(k));
  r.residuals.resize(static_cast<std::size_t>(k));
  r.converged.resize(static_cast<std::size_t>(k));
  r.eigenvectors.conservativeResize(n, k);
  r.negative_count = static_cast<int>(std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(),
                                                    [](double e) { return e < 0.0; }));
  r.method = "shift-invert-lanczos";
  r.shift = shift;
  r.restarts = restarts;
  return r;
}

}  // namespace

SpectralResult dense_eigenpairs(const SparseMatrix& A, int k) {
  const Eigen::Index n = A.rows();
  k = static_cast<int>(std::min<Eigen::Index>(k, n));
  const Eigen::MatrixXd dense(A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", {});

  std::vector<double> values;
  std::vector<double> residuals;
  Eigen::MatrixXd vectors = es.eigenvectors().leftCols(k);
  for (int c = 0; c < k; ++c) {
    values.push_back(es.eigenvalues()[c]);
    residuals.push_back(residual(A, values.back(), vectors.col(c)));
  }
  SpectralResult r = finish(std::move(values), std::move(vectors), std::move(residuals),
                            std::vector<bool>(static_cast<std::size_t>(k), true));
  r.method = "dense";
  return r;
}

SpectralResult lowest_eigenpairs(const SparseMatrix& A, double shift, const SolverOptions& options) {
  if (options.k < 1) throw std::invalid_argument("lowest_eigenpairs: k must be >= 1");
  if (!(options.tol > 0.0)) throw std::invalid_argument("lowest_eigenpairs: tol must be > 0");
  if (A.rows() != A.cols()) throw std::invalid_argument("lowest_eigenpairs: matrix not square");

  switch (options.method) {
    case SolverMethod::Dense:
      return dense_eigenpairs(A, options.k);
    case SolverMethod::ShiftInvert:
      return shift_invert(A, shift, options);
    case SolverMethod::Auto:
      break;
  }
  try {
    return shift_invert(A, shift, options);
  } catch (const ConvergenceError&) {
    if (A.rows() > kDenseFallbackLimit) throw;
  }
  SpectralResult r = dense_eigenpairs(A, options.k);
  r.method = "dense-fallback";
  return r;
}

SpectralResult lowest_eigenpairs(const DiscreteForm& form, const SolverOptions& options) {
  const double shift = options.shift.value_or(crude_lower_bound(form.sigma_hat) - 1.0);
  return lowest_eigenpairs(form.matrix, shift, options);
}

int count_below(const SparseMatrix& A, double tau) {
  SparseMatrix shifted = A;
  for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) -= tau;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) {
    throw ZeroPivotError(fmt::format("zero pivot in LDL^T of A - ({}) I; perturb tau", tau));
  }
  const Vector& d = ldlt.vectorD();
  const double tiny = 1e-14 * (matrix_scale(A) + std::abs(tau));
  int negatives = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (std::abs(d[i]) <= tiny) {
      throw ZeroPivotError(fmt::format("pivot {} of A - ({}) I vanishes; perturb tau", d[i], tau));
    }
    if (d[i] < 0.0) ++negatives;
  }
  return negatives;
}

int count_below(const DiscreteForm& form, double tau) { return count_below(form.matrix, tau); }

int count_below_perturbed(const SparseMatrix& A, double tau) {
  for (int attempt = 0;; ++attempt) {
    try {
      return count_below(A, tau);
    } catch (const ZeroPivotError&) {
      if (attempt == 8) throw;
      tau += 1e-10 * (1.0 + std::abs(tau));
    }
  }
}

double residual(const SparseMatrix& A, double lambda, const Vector& v) {
  return (A * v - lambda * v).norm();
}

double residual(const DiscreteForm& form, double lambda, const Vector& v) {
  return residual(form.matrix, lambda, v);
}

}  // namespace robinlab
