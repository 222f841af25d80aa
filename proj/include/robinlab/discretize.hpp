#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "robinlab/potential.hpp"

namespace robinlab {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Condition imposed on the artificial edges x = R and y = R.
enum class OuterBoundary { Dirichlet, Neumann };

std::string_view to_string(OuterBoundary bc);
OuterBoundary outer_boundary_from_string(std::string_view name);

/// Uniform vertex grid on [0, R]^2, nodes x = i h, y = j h.
///
/// Neumann-outer keeps the outer layer (i = 0..R/h); Dirichlet-outer
/// eliminates it (i = 0..R/h - 1). The Robin edges x = 0 and y = 0 are
/// always present. Row-major indexing i * n + j.
class Grid {
 public:
  Grid(double R, double h, OuterBoundary outer);

  double R() const noexcept { return R_; }
  double h() const noexcept { return h_; }
  OuterBoundary outer() const noexcept { return outer_; }
  int cells() const noexcept { return cells_; }  // R / h
  int n() const noexcept { return n_; }          // nodes per side
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(n_) * n_; }

  Eigen::Index index(int i, int j) const noexcept {
    return static_cast<Eigen::Index>(i) * n_ + j;
  }
  double coord(int i) const noexcept { return i * h_; }

  /// One-dimensional trapezoid weight of node i (1/2 on x = 0 and on a
  /// retained outer node, 1 elsewhere).
  double weight1d(int i) const noexcept;

 private:
  double R_;
  double h_;
  OuterBoundary outer_;
  int cells_;
  int n_;
};

/// Sparse symmetric realization of the quadratic form
///   q[u] = int |grad u|^2 - int_{x=0} sigma(y) u^2 dy - int_{y=0} sigma(x) u^2 dx.
///
/// The ghost-node operator G (5-point Laplacian with u_{-1,j} = u_{1,j} +
/// 2 h sigma u_{0,j}) is similar to the symmetric matrix A = W^{1/2} G W^{-1/2},
/// W the diagonal of trapezoid node weights. A is what is stored; vectors in
/// its basis are nodal values scaled by sqrt(W), so their Euclidean norm is
/// the discrete L2 norm divided by h. Use weigh()/unweigh() to convert.
struct DiscreteForm {
  SparseMatrix matrix;
  Grid grid;
  std::string potential_id;
  double sigma_hat = 0.0;
  double support_bound = 0.0;
  Vector sqrt_weights;

  OuterBoundary outer() const noexcept { return grid.outer(); }

  /// Nodal values -> matrix basis.
  Vector weigh(const Vector& nodal) const;
  /// Matrix basis -> nodal values.
  Vector unweigh(const Vector& v) const;
};

/// Builds the form by looping over grid edges, so every off-diagonal pair
/// is written once with a single value. Boundary strengths are the exact
/// averages of sigma over each node's dual cell, which equals nodal
/// sampling wherever sigma is continuous and stays second order across jumps.
DiscreteForm assemble(const BoundaryPotential& p, const Grid& grid);

/// v^T A v / v^T v.
double rayleigh(const DiscreteForm& form, const Vector& v);

/// Nodal samples f(i h, j h) in grid order. Throws std::domain_error naming
/// the first node where f is not finite.
Vector inject_function(const Grid& grid, const std::function<double(double, double)>& f);

/// Truncation radius leaving a decay margin of 5 / sigma_hat beyond the
/// support (beyond 0 for infinite support); 0 when sigma_hat == 0.
double recommended_radius(const BoundaryPotential& p);

/// Stored nonzeros as "row col value" lines, 17 significant digits.
void write_coordinate(const DiscreteForm& form, std::ostream& os);

}  // namespace robinlab
