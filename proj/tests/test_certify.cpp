#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <limits>

#include "oracles.hpp"
#include "robinlab/certify.hpp"
#include "robinlab/errors.hpp"

using namespace robinlab;
using std::numbers::pi;

TEST_CASE("crude lower bound") {
  CHECK(crude_lower_bound(1.0) == -32.0);
  CHECK(crude_lower_bound(0.0) == 0.0);
  CHECK(crude_lower_bound(0.5) == -8.0);
}

TEST_CASE("energy sandwich") {
  const auto c = ground_energy_sandwich(BoundaryPotential::constant(1.0));
  CHECK(c.lo == -2.0);
  CHECK(c.hi == doctest::Approx(-2.0).epsilon(1e-15));

  const auto s = ground_energy_sandwich(BoundaryPotential::step(1.0, 1.0));
  CHECK(s.lo == -2.0);
  CHECK(s.hi == doctest::Approx(-2.0 + 4.0 * std::exp(-2.0)).epsilon(1e-14));
  CHECK(s.hi == doctest::Approx(-1.45866).epsilon(1e-5));

  CHECK(ground_energy_sandwich(BoundaryPotential::step(1.0, 30.0)).hi == doctest::Approx(-2.0).epsilon(1e-12));

  const auto z = ground_energy_sandwich(BoundaryPotential::constant(0.0));
  CHECK(z.lo == 0.0);
  CHECK(z.hi == 0.0);
}

TEST_CASE("sandwich upper end against Simpson, written as a deficit integral") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> v(-1.5, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> edges{0.0, 0.3, 0.9, 1.6};
    const std::vector<double> values{v(rng), v(rng), v(rng)};
    const auto p = BoundaryPotential::piecewise({0.3, 0.9, 1.6}, values);
    const double s = p.ess_sup();
    // -2 s^2 + 8 s^2 int (s - sigma) e^{-2 s y} dy, sigma = 0 beyond 1.6.
    const double deficit =
        oracle::piecewise_simpson(edges, {s - values[0], s - values[1], s - values[2]},
                                  [s](double y) { return std::exp(-2.0 * s * y); }) +
        s * std::exp(-2.0 * s * 1.6) / (2.0 * s);
    const double hi = -2.0 * s * s + 8.0 * s * s * deficit;
    CHECK(ground_energy_sandwich(p).hi == doctest::Approx(hi).epsilon(1e-11));
    CHECK(ground_energy_sandwich(p).lo <= ground_energy_sandwich(p).hi);
  }
}

TEST_CASE("essential spectrum class") {
  const auto step = ess_spectrum_class(BoundaryPotential::step(1.0, 1.0));
  CHECK(step.cls == EssClass::NonPositiveTail);
  CHECK(*step.bottom == 0.0);
  const auto c = ess_spectrum_class(BoundaryPotential::constant(1.0));
  CHECK(c.cls == EssClass::ConstantPositive);
  CHECK(*c.bottom == -1.0);
  const auto z = ess_spectrum_class(BoundaryPotential::constant(0.0));
  CHECK(z.cls == EssClass::NonPositiveTail);
  CHECK(*z.bottom == 0.0);
  CHECK(ess_spectrum_class(BoundaryPotential::constant(-0.5)).cls == EssClass::NonPositiveTail);
  CHECK(ess_spectrum_class(BoundaryPotential::tabulated(0.1, {1.0, 0.5})).cls == EssClass::NonPositiveTail);
}

TEST_CASE("kinetic term of the stretched exponential") {
  for (int n : {1, 2, 3, 7, 50}) {
    // Gamma-function route: (pi/2) (1/n) Gamma(2) / 2^2.
    const double gamma_chain = (pi / 2.0) * (1.0 / n) * std::tgamma(2.0) / 4.0;
    CHECK(std::abs(certificate_kinetic_term(n) - gamma_chain) <= 1e-14);

    // Raw polar integral (pi/2) int_0^inf |phi'(r)|^2 r dr, split at r = 1
    // so the r^(2/n - 1) singularity gets its own tanh-sinh rule.
    const double a = 1.0 / n;
    const auto f = [a](double r) {
      if (r == 0.0) return 0.0;
      return a * a * std::pow(r, 2.0 * a - 1.0) * std::exp(-2.0 * std::pow(r, a));
    };
    boost::math::quadrature::tanh_sinh<double> near;
    boost::math::quadrature::exp_sinh<double> far;
    const double radial = near.integrate(f, 0.0, 1.0) + far.integrate(f, 1.0, std::numeric_limits<double>::infinity());
    CHECK(std::abs(certificate_kinetic_term(n) - (pi / 2.0) * radial) < 1e-9);
  }
}

TEST_CASE("certificate") {
  const auto c = bound_state_certificate(BoundaryPotential::step(1.0, 1.0), 100);
  REQUIRE(c.has_value());
  CHECK(c->n == 1);
  CHECK(c->q_value == doctest::Approx(pi / 8.0 - 2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-10));
  CHECK(c->q_value == doctest::Approx(-0.871).epsilon(1e-3));
  CHECK(certificate_form_value(BoundaryPotential::step(1.0, 1.0), 1) == doctest::Approx(c->q_value));

  // Weak but positive mean: needs a larger n.
  const auto weak = BoundaryPotential::piecewise({1.0, 2.0}, {0.3, -0.25});
  const auto w = bound_state_certificate(weak, 1000);
  REQUIRE(w.has_value());
  CHECK(w->n > 1);
  CHECK(w->q_value < 0.0);
  CHECK(certificate_form_value(weak, w->n - 1) >= 0.0);

  try {
    bound_state_certificate(BoundaryPotential::piecewise({1.0, 2.0}, {1.0, -1.0}), 100);
    FAIL("expected an inapplicable error");
  } catch (const InapplicableError& e) {
    CHECK(e.reason() == InapplicableError::Reason::NotAttractiveOnAverage);
  }
  try {
    bound_state_certificate(BoundaryPotential::constant(1.0), 100);
    FAIL("expected an inapplicable error");
  } catch (const InapplicableError& e) {
    CHECK(e.reason() == InapplicableError::Reason::EssentialBottomNotZero);
  }
}

TEST_CASE("negative count bound") {
  CHECK(!negative_count_bound(BoundaryPotential::step(3.0, 1.0)).has_value());
  CHECK(negative_count_bound(BoundaryPotential::step(1e-6, 1.0)) == 1);
  CHECK(negative_count_bound(BoundaryPotential::step(1.0, 1.0)) == 1);
  try {
    negative_count_bound(BoundaryPotential::constant(1.0));
    FAIL("expected an inapplicable error");
  } catch (const InapplicableError& e) {
    CHECK(e.reason() == InapplicableError::Reason::InfiniteSupport);
  }
}

TEST_CASE("negative count bound against a finite-difference interval spectrum") {
  for (const auto& [s, L] : {std::pair{0.5, 1.0}, std::pair{1.0, 1.0}, std::pair{1.5, 1.2},
                            std::pair{0.9, 2.0}, std::pair{0.2, 6.0}}) {
    const Eigen::VectorXd fd = oracle::interval_fd_spectrum(s, L, 1200);
    const double threshold = -fd[0];  // kappa^2
    const int count = oracle::dense_count_below(fd, threshold);
    CHECK(negative_count_bound(BoundaryPotential::step(s, L)) == count);
  }
}

TEST_CASE("full report") {
  const auto c = full_report(BoundaryPotential::constant(1.0), 100);
  CHECK(c.crude_lower == -32.0);
  CHECK(c.sandwich_lo == -2.0);
  CHECK(c.sandwich_hi == doctest::Approx(-2.0));
  CHECK(c.ess_class == EssClass::ConstantPositive);
  CHECK(!c.certificate);
  CHECK(!c.count_bound);
  CHECK(!c.count_bound_applicable);

  const auto s = full_report(BoundaryPotential::step(1.0, 1.0), 100);
  CHECK(s.sandwich_hi == doctest::Approx(-2.0 + 4.0 * std::exp(-2.0)));
  CHECK(s.ess_class == EssClass::NonPositiveTail);
  CHECK(s.certificate.has_value());
  CHECK(s.count_bound.has_value());

  const auto z = full_report(BoundaryPotential::constant(0.0), 100);
  CHECK(z.crude_lower == 0.0);
  CHECK(z.sandwich_lo == 0.0);
  CHECK(z.sandwich_hi == 0.0);
  CHECK(z.ess_class == EssClass::NonPositiveTail);
  CHECK(!z.certificate);
  CHECK(!z.count_bound);
}
