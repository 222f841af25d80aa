#pragma once

#include <span>
#include <vector>

namespace robinlab {

/// Bound state of -d^2/dx^2 on the half-line with phi'(0) + sigma phi(0) = 0.
struct HalfLineBoundState {
  double sigma = 0.0;
  double energy = 0.0;  // -sigma^2

  /// sqrt(2 sigma) e^{-sigma x}, unit L2 norm on [0, inf).
  double profile(double x) const;
};

HalfLineBoundState halfline_bound_state(double sigma);

/// Exact solution for constant sigma > 0: the quarter-plane operator is the
/// Kronecker sum of two half-line operators.
struct ConstantReference {
  double sigma = 0.0;
  double ground_energy = 0.0;  // -2 sigma^2, simple eigenvalue
  double ess_bottom = 0.0;     // -sigma^2

  /// 2 sigma e^{-sigma (x + y)}, unit L2 norm on the quarter-plane.
  double ground_state(double x, double y) const;
};

ConstantReference constant_reference(double sigma);

/// Spectrum of -d^2/dx^2 on [0, L] with Robin constant sigma_hat at both
/// ends (phi'(0) + s phi(0) = 0, -phi'(L) + s phi(L) = 0).
struct Interval1DSpectrum {
  double L = 0.0;
  double sigma_hat = 0.0;
  double kappa = 0.0;  // ground state -kappa^2
  double k_max = 0.0;  // positive roots are complete on (0, k_max]
  std::vector<double> negative_eigenvalues;
  /// Zero is an eigenvalue exactly when sigma_hat * L == 2 (linear eigenfunction).
  bool has_zero_mode = false;
  std::vector<double> positive_roots;
  std::vector<double> eigenvalues;  // ascending, with multiplicity
};

/// Root kappa > sigma_hat of kappa tanh(kappa L / 2) = sigma_hat.
double interval_ground_kappa(double sigma_hat, double L);

/// Number of negative eigenvalues: 1 if sigma_hat <= 2/L, else 2.
int interval_negative_count(double sigma_hat, double L);

/// Pole-free form of tan(kL) = 2 s k / (s^2 - k^2):
/// g(k) = sin(kL)(s^2 - k^2) - 2 s k cos(kL).
double interval_root_function(double k, double sigma_hat, double L);

/// All positive roots of g in (0, k_max], ascending. Requires
/// sigma_hat <= 2/L; throws InapplicableError otherwise.
std::vector<double> interval_positive_roots(double sigma_hat, double L, double k_max);

/// Everything above, merged. k_max bounds the positive roots searched.
Interval1DSpectrum interval_spectrum(double sigma_hat, double L, double k_max);

/// Sums e_n + e_m (n >= m) not exceeding e_max, ascending with multiplicity.
std::vector<double> tensor_spectrum_symmetric(std::span<const double> eigenvalues, double e_max);

/// Same, but checks that the spectrum was computed far enough to be
/// complete below e_max (throws std::invalid_argument otherwise).
std::vector<double> tensor_spectrum_symmetric(const Interval1DSpectrum& spec, double e_max);

}  // namespace robinlab
