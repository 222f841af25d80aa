#include "robinlab/discretize.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace robinlab {

std::string_view to_string(OuterBoundary bc) {
  return bc == OuterBoundary::Dirichlet ? "dirichlet" : "neumann";
}

OuterBoundary outer_boundary_from_string(std::string_view name) {
  if (name == "dirichlet") return OuterBoundary::Dirichlet;
  if (name == "neumann") return OuterBoundary::Neumann;
  throw std::invalid_argument(fmt::format("unknown outer boundary '{}'", name));
}

Grid::Grid(double R, double h, OuterBoundary outer) : R_(R), h_(h), outer_(outer) {
  if (!(R > 0.0) || !(h > 0.0) || !std::isfinite(R) || !std::isfinite(h)) {
    throw std::invalid_argument("grid: R and h must be positive and finite");
  }
  const double ratio = R / h;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw std::invalid_argument(fmt::format("grid: R/h = {} is not an integer", ratio));
  }
  cells_ = static_cast<int>(rounded);
  n_ = outer == OuterBoundary::Neumann ? cells_ + 1 : cells_;
  if (n_ < 3) throw std::invalid_argument("grid: need at least 3 nodes per side");
}

double Grid::weight1d(int i) const noexcept {
  if (i == 0) return 0.5;
  if (outer_ == OuterBoundary::Neumann && i == cells_) return 0.5;
  return 1.0;
}

Vector DiscreteForm::weigh(const Vector& nodal) const {
  return nodal.cwiseProduct(sqrt_weights);
}

Vector DiscreteForm::unweigh(const Vector& v) const {
  return v.cwiseQuotient(sqrt_weights);
}

DiscreteForm assemble(const BoundaryPotential& p, const Grid& grid) {
  const int n = grid.n();
  const double h = grid.h();
  const double inv_h2 = 1.0 / (h * h);
  const Eigen::Index size = grid.size();

  Vector sqrt_w(size);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      sqrt_w[grid.index(i, j)] = std::sqrt(grid.weight1d(i) * grid.weight1d(j));
    }
  }

  // Integral of sigma over the dual cell of boundary node k.
  std::vector<double> dual_sigma(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double lo = std::max(0.0, (k - 0.5) * h);
    const double hi = k == grid.cells() ? grid.R() : (k + 0.5) * h;
    dual_sigma[static_cast<std::size_t>(k)] = p.integral_over(lo, hi);
  }

  Vector diag = Vector::Zero(size);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(5 * size));

  // Edge between (i,j) and its neighbour one step along a direction; the
  // edge weight is the trapezoid weight of the transverse coordinate.
  const auto add_edge = [&](Eigen::Index a, int ai, int aj, int bi, int bj, double e) {
    diag[a] += e * inv_h2;
    if (bi >= n || bj >= n) return;  // eliminated Dirichlet layer
    const Eigen::Index b = grid.index(bi, bj);
    diag[b] += e * inv_h2;
    const double w = grid.weight1d(ai) * grid.weight1d(aj) * grid.weight1d(bi) * grid.weight1d(bj);
    const double value = -e * inv_h2 / std::sqrt(w);
    entries.emplace_back(a, b, value);
    entries.emplace_back(b, a, value);
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Index a = grid.index(i, j);
      if (i + 1 < n || grid.outer() == OuterBoundary::Dirichlet) {
        add_edge(a, i, j, i + 1, j, grid.weight1d(j));
      }
      if (j + 1 < n || grid.outer() == OuterBoundary::Dirichlet) {
        add_edge(a, i, j, i, j + 1, grid.weight1d(i));
      }
    }
  }

  // Robin edges: x = 0 carries sigma(y), y = 0 carries sigma(x).
  for (int k = 0; k < n; ++k) {
    diag[grid.index(0, k)] -= dual_sigma[static_cast<std::size_t>(k)] * inv_h2;
    diag[grid.index(k, 0)] -= dual_sigma[static_cast<std::size_t>(k)] * inv_h2;
  }

  for (Eigen::Index a = 0; a < size; ++a) {
    entries.emplace_back(a, a, diag[a] / (sqrt_w[a] * sqrt_w[a]));
  }

  SparseMatrix A(size, size);
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();

  return DiscreteForm{std::move(A), grid, p.id(), p.ess_sup(), p.support_bound(), std::move(sqrt_w)};
}

double rayleigh(const DiscreteForm& form, const Vector& v) {
  if (v.size() != form.matrix.rows()) {
    throw std::invalid_argument("rayleigh: dimension mismatch");
  }
  const double vv = v.squaredNorm();
  if (vv == 0.0) throw std::invalid_argument("rayleigh: zero vector");
  return v.dot(form.matrix * v) / vv;
}

Vector inject_function(const Grid& grid, const std::function<double(double, double)>& f) {
  Vector out(grid.size());
  for (int i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < grid.n(); ++j) {
      const double value = f(grid.coord(i), grid.coord(j));
      if (!std::isfinite(value)) {
        throw std::domain_error(fmt::format("inject_function: non-finite value at node ({}, {})", i, j));
      }
      out[grid.index(i, j)] = value;
    }
  }
  return out;
}

double recommended_radius(const BoundaryPotential& p) {
  const double s = p.ess_sup();
  if (s == 0.0) return 0.0;
  const double support = std::isfinite(p.support_bound()) ? p.support_bound() : 0.0;
  return support + 5.0 / s;
}

void write_coordinate(const DiscreteForm& form, std::ostream& os) {
  const auto& A = form.matrix;
  for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
      fmt::print(os, "{} {} {:.17g}\n", it.row(), it.col(), it.value());
    }
  }
}

}  // namespace robinlab
