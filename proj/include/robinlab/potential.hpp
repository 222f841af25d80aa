#pragma once

#include <string>
#include <variant>
#include <vector>

namespace robinlab {

struct ConstantSigma {
  double sigma = 0.0;
};

/// sigma on [0, L), zero beyond.
struct StepSigma {
  double sigma = 0.0;
  double L = 1.0;
};

/// values[i] on [breaks[i-1], breaks[i]) with breaks[-1] = 0; zero beyond
/// the last break.
struct PiecewiseSigma {
  std::vector<double> breaks;
  std::vector<double> values;
};

/// samples[i] on [i*spacing, (i+1)*spacing); zero beyond the last sample.
struct TabulatedSigma {
  double spacing = 0.1;
  std::vector<double> samples;
};

/// Boundary interaction strength sigma(y) of the Robin condition
/// d(phi)/dn + sigma(y) phi = 0 on both edges of the quarter-plane.
///
/// Every supported kind is piecewise constant, so the class keeps a
/// normalized cell table (edges, values, tail value) and evaluates all
/// integrals cell by cell in closed form where one exists. Instances are
/// immutable.
class BoundaryPotential {
 public:
  using Kind = std::variant<ConstantSigma, StepSigma, PiecewiseSigma, TabulatedSigma>;

  static BoundaryPotential constant(double sigma);
  static BoundaryPotential step(double sigma, double L);
  static BoundaryPotential piecewise(std::vector<double> breaks, std::vector<double> values);
  static BoundaryPotential tabulated(double spacing, std::vector<double> samples);

  const Kind& kind() const noexcept { return kind_; }

  /// sigma(y); cells are left-closed / right-open. Throws
  /// std::domain_error for y < 0.
  double operator()(double y) const;
  double eval(double y) const { return (*this)(y); }

  /// ||sigma||_inf.
  double ess_sup() const noexcept { return ess_sup_; }

  /// Smallest L with sigma = 0 beyond L; +inf for a nonzero constant.
  double support_bound() const noexcept { return support_; }

  /// Integral over [0, inf). Throws NotIntegrableError for a nonzero constant.
  double integral() const;

  /// Exact integral over [a, b], 0 <= a <= b. Finite b is required when the
  /// tail is nonzero.
  double integral_over(double a, double b) const;

  /// Integral of sigma(y) exp(-a y) over [0, inf), a > 0.
  double weighted_integral(double a) const;

  /// Integral of sigma(y) exp(-y^eps) over [0, inf), 0 < eps <= 1, by
  /// adaptive quadrature per cell (absolute tolerance 1e-10).
  double stretched_weighted_integral(double eps) const;

  /// True for Constant with sigma != 0 (the only unbounded-support kind).
  bool has_infinite_support() const noexcept { return tail_ != 0.0; }

  /// Short stable identifier, e.g. "step(sigma=1,L=1)".
  const std::string& id() const noexcept { return id_; }

 private:
  explicit BoundaryPotential(Kind kind);

  Kind kind_;
  std::vector<double> edges_;   // 0 = edges_[0] < ... < edges_[n]
  std::vector<double> values_;  // values_[i] on [edges_[i], edges_[i+1])
  double tail_ = 0.0;           // value beyond edges_.back()
  double ess_sup_ = 0.0;
  double support_ = 0.0;
  std::string id_;
};

}  // namespace robinlab
