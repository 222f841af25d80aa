#include "robinlab/analytic1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "robinlab/errors.hpp"

namespace robinlab {

namespace {

// Relative slack used when deciding sigma_hat * L <= 2.
constexpr double kThresholdSlack = 1e-12;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("{} must be positive and finite, got {}", what, v));
  }
}

bool within_single_negative_regime(double sigma_hat, double L) {
  return sigma_hat * L <= 2.0 * (1.0 + kThresholdSlack);
}

bool at_threshold(double sigma_hat, double L) {
  return std::abs(sigma_hat * L - 2.0) <= 2.0 * kThresholdSlack;
}

// Bisection down to adjacent doubles. f(lo) and f(hi) must differ in sign.
template <typename F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double HalfLineBoundState::profile(double x) const {
  return std::sqrt(2.0 * sigma) * std::exp(-sigma * x);
}

HalfLineBoundState halfline_bound_state(double sigma) {
  require_positive(sigma, "sigma");
  return {sigma, -sigma * sigma};
}

double ConstantReference::ground_state(double x, double y) const {
  return 2.0 * sigma * std::exp(-sigma * (x + y));
}

ConstantReference constant_reference(double sigma) {
  const auto half = halfline_bound_state(sigma);
  return {sigma, 2.0 * half.energy, half.energy};
}

double interval_ground_kappa(double sigma_hat, double L) {
  require_positive(sigma_hat, "sigma_hat");
  require_positive(L, "L");
  // kappa tanh(kappa L/2) is strictly increasing on (0, inf); the bracket
  // [s, s + 2/L + 10] always contains the crossing.
  const auto f = [&](double kappa) { return kappa * std::tanh(0.5 * kappa * L) - sigma_hat; };
  return bisect(f, sigma_hat, sigma_hat + 2.0 / L + 10.0);
}

int interval_negative_count(double sigma_hat, double L) {
  require_positive(sigma_hat, "sigma_hat");
  require_positive(L, "L");
  return within_single_negative_regime(sigma_hat, L) ? 1 : 2;
}

double interval_root_function(double k, double sigma_hat, double L) {
  return std::sin(k * L) * (sigma_hat * sigma_hat - k * k) - 2.0 * sigma_hat * k * std::cos(k * L);
}

std::vector<double> interval_positive_roots(double sigma_hat, double L, double k_max) {
  require_positive(sigma_hat, "sigma_hat");
  require_positive(L, "L");
  require_positive(k_max, "k_max");
  if (!within_single_negative_regime(sigma_hat, L)) {
    throw InapplicableError(InapplicableError::Reason::CouplingTooStrong,
                            fmt::format("sigma_hat * L = {} exceeds 2", sigma_hat * L));
  }

  // g(k)/k removes the trivial root at k = 0; its limit there is s(sL - 2).
  const auto reduced = [&](double k) {
    if (k == 0.0) return at_threshold(sigma_hat, L) ? 0.0 : sigma_hat * (sigma_hat * L - 2.0);
    return interval_root_function(k, sigma_hat, L) / k;
  };

  // Consecutive multiples of pi/(2L) separate the poles of tan(kL); each is
  // split into 8 sub-brackets.
  const double step = std::numbers::pi / (16.0 * L);
  std::vector<double> roots;
  double a = 0.0;
  double fa = reduced(a);
  for (long j = 1; a < k_max; ++j) {
    const double b = std::min(static_cast<double>(j) * step, k_max);
    const double fb = reduced(b);
    if (fb == 0.0) {
      roots.push_back(b);
    } else if (fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
      roots.push_back(bisect(reduced, a, b));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

Interval1DSpectrum interval_spectrum(double sigma_hat, double L, double k_max) {
  Interval1DSpectrum spec;
  spec.L = L;
  spec.sigma_hat = sigma_hat;
  spec.k_max = k_max;
  spec.positive_roots = interval_positive_roots(sigma_hat, L, k_max);
  spec.kappa = interval_ground_kappa(sigma_hat, L);
  spec.negative_eigenvalues = {-spec.kappa * spec.kappa};
  spec.has_zero_mode = at_threshold(sigma_hat, L);

  spec.eigenvalues = spec.negative_eigenvalues;
  if (spec.has_zero_mode) spec.eigenvalues.push_back(0.0);
  for (double k : spec.positive_roots) spec.eigenvalues.push_back(k * k);
  std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end());
  return spec;
}

std::vector<double> tensor_spectrum_symmetric(std::span<const double> eigenvalues, double e_max) {
  std::vector<double> out;
  for (std::size_t n = 0; n < eigenvalues.size(); ++n) {
    for (std::size_t m = 0; m <= n; ++m) {
      const double e = eigenvalues[n] + eigenvalues[m];
      if (e <= e_max) out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> tensor_spectrum_symmetric(const Interval1DSpectrum& spec, double e_max) {
  if (spec.eigenvalues.empty()) return {};
  // A sum e_n + e_0 <= e_max needs e_n <= e_max - e_0.
  const double needed = e_max - spec.eigenvalues.front();
  if (needed > spec.k_max * spec.k_max) {
    throw std::invalid_argument(fmt::format(
        "interval spectrum known up to k = {}, need sqrt({}) for e_max = {}", spec.k_max, needed,
        e_max));
  }
  return tensor_spectrum_symmetric(std::span<const double>(spec.eigenvalues), e_max);
}

}  // namespace robinlab
