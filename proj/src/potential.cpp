#include "robinlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "robinlab/errors.hpp"

namespace robinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("potential: {} must be finite", what));
  }
}

}  // namespace

BoundaryPotential BoundaryPotential::constant(double sigma) {
  return BoundaryPotential(ConstantSigma{sigma});
}

BoundaryPotential BoundaryPotential::step(double sigma, double L) {
  return BoundaryPotential(StepSigma{sigma, L});
}

BoundaryPotential BoundaryPotential::piecewise(std::vector<double> breaks,
                                               std::vector<double> values) {
  return BoundaryPotential(PiecewiseSigma{std::move(breaks), std::move(values)});
}

BoundaryPotential BoundaryPotential::tabulated(double spacing, std::vector<double> samples) {
  return BoundaryPotential(TabulatedSigma{spacing, std::move(samples)});
}

BoundaryPotential::BoundaryPotential(Kind kind) : kind_(std::move(kind)) {
  edges_.push_back(0.0);

  if (const auto* c = std::get_if<ConstantSigma>(&kind_)) {
    require_finite(c->sigma, "sigma");
    tail_ = c->sigma;
    id_ = fmt::format("constant(sigma={})", c->sigma);
  } else if (const auto* s = std::get_if<StepSigma>(&kind_)) {
    require_finite(s->sigma, "sigma");
    if (!(s->L > 0.0) || !std::isfinite(s->L)) {
      throw std::invalid_argument("potential: step requires finite L > 0");
    }
    edges_.push_back(s->L);
    values_.push_back(s->sigma);
    id_ = fmt::format("step(sigma={},L={})", s->sigma, s->L);
  } else if (const auto* p = std::get_if<PiecewiseSigma>(&kind_)) {
    if (p->breaks.size() != p->values.size() || p->breaks.empty()) {
      throw std::invalid_argument(
          "potential: piecewise needs one value per break and at least one break");
    }
    for (std::size_t i = 0; i < p->breaks.size(); ++i) {
      require_finite(p->breaks[i], "break");
      require_finite(p->values[i], "value");
      if (!(p->breaks[i] > edges_.back())) {
        throw std::invalid_argument("potential: breaks must be positive and strictly ascending");
      }
      edges_.push_back(p->breaks[i]);
      values_.push_back(p->values[i]);
    }
    id_ = fmt::format("piecewise(breaks=[{}],values=[{}])", fmt::join(p->breaks, ","),
                      fmt::join(p->values, ","));
  } else {
    const auto& t = std::get<TabulatedSigma>(kind_);
    if (!(t.spacing > 0.0) || !std::isfinite(t.spacing)) {
      throw std::invalid_argument("potential: tabulated spacing must be positive");
    }
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      require_finite(t.samples[i], "sample");
      edges_.push_back(static_cast<double>(i + 1) * t.spacing);
      values_.push_back(t.samples[i]);
    }
    id_ = fmt::format("tabulated(spacing={},n={})", t.spacing, t.samples.size());
  }

  ess_sup_ = std::abs(tail_);
  for (double v : values_) ess_sup_ = std::max(ess_sup_, std::abs(v));

  if (tail_ != 0.0) {
    support_ = kInf;
  } else {
    support_ = 0.0;
    for (std::size_t i = values_.size(); i-- > 0;) {
      if (values_[i] != 0.0) {
        support_ = edges_[i + 1];
        break;
      }
    }
  }
}

double BoundaryPotential::operator()(double y) const {
  if (!(y >= 0.0)) {
    throw std::domain_error(fmt::format("potential: eval at negative y = {}", y));
  }
  // First edge strictly greater than y closes the cell containing y.
  auto it = std::upper_bound(edges_.begin(), edges_.end(), y);
  if (it == edges_.end()) return tail_;
  return values_[static_cast<std::size_t>(it - edges_.begin()) - 1];
}

double BoundaryPotential::integral() const {
  if (tail_ != 0.0) {
    throw NotIntegrableError(fmt::format("{} has infinite support", id_));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    total += values_[i] * (edges_[i + 1] - edges_[i]);
  }
  return total;
}

double BoundaryPotential::integral_over(double a, double b) const {
  if (!(a >= 0.0) || !(b >= a)) {
    throw std::domain_error("potential: integral_over needs 0 <= a <= b");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double lo = std::max(a, edges_[i]);
    const double hi = std::min(b, edges_[i + 1]);
    if (hi > lo) total += values_[i] * (hi - lo);
  }
  if (tail_ != 0.0 && b > edges_.back()) {
    if (!std::isfinite(b)) {
      throw NotIntegrableError(fmt::format("{} has infinite support", id_));
    }
    total += tail_ * (b - std::max(a, edges_.back()));
  }
  return total;
}

double BoundaryPotential::weighted_integral(double a) const {
  if (!(a > 0.0)) {
    throw std::domain_error("potential: weighted_integral needs a > 0");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == 0.0) continue;
    // e^{-a lo} - e^{-a hi} without cancellation for small a.
    const double width = edges_[i + 1] - edges_[i];
    total += values_[i] * std::exp(-a * edges_[i]) * -std::expm1(-a * width) / a;
  }
  if (tail_ != 0.0) total += tail_ * std::exp(-a * edges_.back()) / a;
  return total;
}

double BoundaryPotential::stretched_weighted_integral(double eps) const {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::domain_error("potential: stretched integral needs 0 < eps <= 1");
  }
  if (tail_ != 0.0) {
    throw NotIntegrableError(fmt::format("{} has infinite support", id_));
  }
  // The integrand has an unbounded derivative at y = 0 for eps < 1;
  // tanh-sinh is insensitive to endpoint singularities.
  boost::math::quadrature::tanh_sinh<double> integrator;
  const auto weight = [eps](double y) { return std::exp(-std::pow(y, eps)); };
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == 0.0) continue;
    const double lo = edges_[i];
    const double hi = edges_[i + 1];
    const double tol = 1e-12 / std::max(1.0, hi - lo);
    total += values_[i] * integrator.integrate(weight, lo, hi, tol);
  }
  return total;
}

}  // namespace robinlab
