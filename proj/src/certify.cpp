#include "robinlab/certify.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "robinlab/analytic1d.hpp"
#include "robinlab/errors.hpp"

namespace robinlab {

std::string_view to_string(EssClass c) {
  switch (c) {
    case EssClass::NonPositiveTail: return "NonPositiveTail";
    case EssClass::VanishingTail: return "VanishingTail";
    case EssClass::ConstantPositive: return "ConstantPositive";
    case EssClass::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

double crude_lower_bound(double sigma_hat) {
  if (!(sigma_hat >= 0.0)) throw std::invalid_argument("sigma_hat must be nonnegative");
  return -32.0 * sigma_hat * sigma_hat;
}

EnergySandwich ground_energy_sandwich(const BoundaryPotential& p) {
  const double s = p.ess_sup();
  if (s == 0.0) return {0.0, 0.0};
  const double s2 = s * s;
  // Rearranged with int s e^{-2 s y} dy = 1/2 so only int sigma e^{-2 s y}
  // is needed.
  return {-2.0 * s2, 2.0 * s2 - 8.0 * s2 * p.weighted_integral(2.0 * s)};
}

EssSpectrum ess_spectrum_class(const BoundaryPotential& p) {
  if (const auto* c = std::get_if<ConstantSigma>(&p.kind())) {
    if (c->sigma > 0.0) return {EssClass::ConstantPositive, -c->sigma * c->sigma};
    return {EssClass::NonPositiveTail, 0.0};
  }
  // Remaining kinds vanish beyond their last cell.
  if (std::isfinite(p.support_bound())) return {EssClass::NonPositiveTail, 0.0};
  return {EssClass::Inconclusive, std::nullopt};
}

double certificate_kinetic_term(int n) {
  if (n < 1) throw std::invalid_argument("certificate index n must be >= 1");
  return std::numbers::pi / (8.0 * n);
}

double certificate_form_value(const BoundaryPotential& p, int n) {
  const double eps = 1.0 / n;
  return certificate_kinetic_term(n) - 2.0 * p.stretched_weighted_integral(eps);
}

std::optional<Certificate> bound_state_certificate(const BoundaryPotential& p, int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const auto ess = ess_spectrum_class(p);
  if (!ess.bottom || *ess.bottom != 0.0) {
    throw InapplicableError(InapplicableError::Reason::EssentialBottomNotZero,
                            fmt::format("{}: essential spectrum does not start at 0", p.id()));
  }
  if (p.has_infinite_support() || !(p.integral() > 0.0)) {
    throw InapplicableError(InapplicableError::Reason::NotAttractiveOnAverage,
                            fmt::format("{}: integral of sigma is not positive", p.id()));
  }
  for (int n = 1; n <= n_max; ++n) {
    Certificate c;
    c.n = n;
    c.kinetic = certificate_kinetic_term(n);
    c.potential_term = 2.0 * p.stretched_weighted_integral(1.0 / n);
    c.q_value = c.kinetic - c.potential_term;
    if (c.q_value < 0.0) return c;
  }
  return std::nullopt;
}

std::optional<int> negative_count_bound(const BoundaryPotential& p) {
  const double L = p.support_bound();
  if (!std::isfinite(L)) {
    throw InapplicableError(InapplicableError::Reason::InfiniteSupport,
                            fmt::format("{}: support is unbounded", p.id()));
  }
  const double s = p.ess_sup();
  if (s == 0.0) return std::nullopt;
  if (interval_negative_count(s, L) != 1) return std::nullopt;

  const double kappa = interval_ground_kappa(s, L);
  const auto spec = interval_spectrum(s, L, kappa);
  const double threshold = kappa * kappa;
  int count = 0;
  for (double e : spec.eigenvalues) {
    if (e < threshold) ++count;
  }
  return count;
}

BoundsReport full_report(const BoundaryPotential& p, int n_max) {
  BoundsReport r;
  r.sigma_hat = p.ess_sup();
  r.crude_lower = crude_lower_bound(r.sigma_hat);
  const auto sandwich = ground_energy_sandwich(p);
  r.sandwich_lo = sandwich.lo;
  r.sandwich_hi = sandwich.hi;
  const auto ess = ess_spectrum_class(p);
  r.ess_class = ess.cls;
  r.ess_bottom = ess.bottom;

  try {
    r.certificate = bound_state_certificate(p, n_max);
  } catch (const InapplicableError&) {
    r.certificate.reset();
  }
  try {
    r.count_bound = negative_count_bound(p);
  } catch (const InapplicableError&) {
    r.count_bound.reset();
  }
  r.count_bound_applicable = r.count_bound.has_value();
  return r;
}

}  // namespace robinlab
