#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "robinlab/discretize.hpp"
#include "robinlab/eigensolve.hpp"

namespace robinlab {

/// True iff, after flipping v so its largest-magnitude entry is positive,
/// no entry is below -tol.
bool ground_state_positivity(const Vector& v, double tol);

/// Unit direction in the closed quarter-plane.
struct Ray {
  double dx = 1.0;
  double dy = 0.0;

  static Ray diagonal();
  static Ray axis();
  static Ray normalized(double dx, double dy);
};

struct DecayFit {
  Ray ray;
  double r_min = 0.0;
  double r_max = 0.0;
  int samples = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  double predicted_rate = 0.0;  // -sqrt|E|
  bool with_prefactor = false;
  std::vector<double> radii;
  std::vector<double> values;  // |phi(r ray)|
};

using Field = std::function<double(double x, double y)>;

/// Least-squares line through (r, log|phi| [+ 1/2 log r]) at `samples`
/// equally spaced radii in [r_min, r_max]. Throws UnderflowWindowError when a
/// sample is below floor (relative to the largest sample magnitude seen).
DecayFit decay_fit(const Field& phi, double energy, Ray ray, double r_min, double r_max,
                   int samples, bool with_prefactor, double floor = 1e-14);

/// Fit on a grid eigenvector (matrix basis) sampled by bilinear interpolation.
/// Enforces r_min >= support_bound + 1 and r_max <= R - 2; the underflow
/// floor is relative to max |nodal value|.
DecayFit decay_fit(const DiscreteForm& form, const Vector& v, double energy, Ray ray, double r_min,
                   double r_max, int samples = 40, bool with_prefactor = true);

/// Default window [support_bound + 2, R - 3], or [support_bound + 1, R - 2]
/// when the first one is empty.
std::pair<double, double> default_decay_window(const DiscreteForm& form);

/// Bilinear interpolation of nodal values; points beyond a Dirichlet-outer
/// grid interpolate towards the eliminated zero layer.
double bilinear(const Grid& grid, const Vector& nodal, double x, double y);

struct TruncationBracket {
  std::vector<double> lo;  // Neumann-outer
  std::vector<double> hi;  // Dirichlet-outer
  /// hi < ess_bottom: the pair encloses a discrete eigenvalue of the truncation.
  std::vector<bool> enclosed;
  double ess_bottom = 0.0;
};

/// Neumann/Dirichlet pair of solves on the same [0, R]^2 grid.
TruncationBracket truncation_bracket(const BoundaryPotential& p, double R, double h, int k,
                                     const SolverOptions& options = {});

struct ConvergenceStudy {
  std::vector<double> h_values;  // descending
  std::vector<double> lambda_values;
  double extrapolated = 0.0;
  double order = 0.0;
};

/// Richardson extrapolation on points with h in ratio 2 (at least three;
/// the three finest are used). Throws NoAsymptoticRegimeError when the
/// successive differences change sign or vanish.
ConvergenceStudy richardson(std::span<const std::pair<double, double>> points);

}  // namespace robinlab
