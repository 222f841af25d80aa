#pragma once

#include <optional>
#include <string_view>

#include "robinlab/potential.hpp"

namespace robinlab {

enum class EssClass { NonPositiveTail, VanishingTail, ConstantPositive, Inconclusive };

std::string_view to_string(EssClass c);

struct EssSpectrum {
  EssClass cls = EssClass::Inconclusive;
  std::optional<double> bottom;  // unknown for Inconclusive
};

struct EnergySandwich {
  double lo = 0.0;
  double hi = 0.0;
};

/// Outcome of the trial-function test with phi(r) = exp(-r^(1/n)).
struct Certificate {
  int n = 0;
  double q_value = 0.0;         // kinetic - potential_term < 0
  double kinetic = 0.0;         // pi / (8n)
  double potential_term = 0.0;  // 2 * int sigma(y) exp(-y^(1/n)) dy
};

struct BoundsReport {
  double sigma_hat = 0.0;
  double crude_lower = 0.0;
  double sandwich_lo = 0.0;
  double sandwich_hi = 0.0;
  EssClass ess_class = EssClass::Inconclusive;
  std::optional<double> ess_bottom;
  std::optional<Certificate> certificate;
  std::optional<int> count_bound;
  bool count_bound_applicable = false;
};

/// -32 sigma_hat^2, from the trace estimate with delta = 1/(4 sigma_hat).
double crude_lower_bound(double sigma_hat);

/// -2 s^2 <= E <= 2 s^2 - 8 s^2 int sigma e^{-2 s y} dy with s = ess_sup(p).
/// Degenerates to (0, 0) for the zero potential.
EnergySandwich ground_energy_sandwich(const BoundaryPotential& p);

EssSpectrum ess_spectrum_class(const BoundaryPotential& p);

/// Dirichlet energy of exp(-r^(1/n)) over the quarter-plane: pi/(8n).
double certificate_kinetic_term(int n);

/// q[exp(-r^(1/n))] = pi/(8n) - 2 int sigma(y) exp(-y^(1/n)) dy.
double certificate_form_value(const BoundaryPotential& p, int n);

/// Smallest n <= n_max with a negative form value. Throws InapplicableError
/// when int sigma <= 0 or the essential spectrum does not start at 0.
std::optional<Certificate> bound_state_certificate(const BoundaryPotential& p, int n_max);

/// Upper bound on the number of negative eigenvalues from the interval
/// Robin operator with constant ess_sup(p) on [0, support_bound(p)].
/// Empty when sigma_hat > 2/L or sigma == 0; throws InapplicableError
/// (InfiniteSupport) for unbounded support.
std::optional<int> negative_count_bound(const BoundaryPotential& p);

/// Never throws when a bound does not apply; the entry is left empty instead.
BoundsReport full_report(const BoundaryPotential& p, int n_max);

}  // namespace robinlab
