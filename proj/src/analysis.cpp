#include "robinlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "robinlab/certify.hpp"
#include "robinlab/errors.hpp"

namespace robinlab {

bool ground_state_positivity(const Vector& v, double tol) {
  if (v.size() == 0) return false;
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const double sign = v[imax] < 0.0 ? -1.0 : 1.0;
  return (sign * v).minCoeff() >= -tol;
}

Ray Ray::diagonal() { return normalized(1.0, 1.0); }

Ray Ray::axis() { return {1.0, 0.0}; }

Ray Ray::normalized(double dx, double dy) {
  const double norm = std::hypot(dx, dy);
  if (!(dx >= 0.0 && dy >= 0.0 && norm > 0.0)) {
    throw std::invalid_argument("ray must point into the closed quarter-plane");
  }
  return {dx / norm, dy / norm};
}

DecayFit decay_fit(const Field& phi, double energy, Ray ray, double r_min, double r_max,
                   int samples, bool with_prefactor, double floor) {
  if (!(energy < 0.0)) throw std::invalid_argument("decay_fit: energy must be negative");
  if (samples < 10) throw std::invalid_argument("decay_fit: need at least 10 radii");
  if (!(r_min > 0.0 && r_max > r_min)) throw std::invalid_argument("decay_fit: bad window");

  DecayFit fit;
  fit.ray = ray;
  fit.r_min = r_min;
  fit.r_max = r_max;
  fit.samples = samples;
  fit.with_prefactor = with_prefactor;
  fit.predicted_rate = -std::sqrt(-energy);

  std::vector<double> ys;
  for (int s = 0; s < samples; ++s) {
    const double r = r_min + (r_max - r_min) * s / (samples - 1);
    const double value = std::abs(phi(r * ray.dx, r * ray.dy));
    if (!(value >= floor)) {
      throw UnderflowWindowError(
          fmt::format("decay_fit: |phi| = {} at r = {} is below {}; shrink r_max", value, r, floor));
    }
    fit.radii.push_back(r);
    fit.values.push_back(value);
    ys.push_back(std::log(value) + (with_prefactor ? 0.5 * std::log(r) : 0.0));
  }

  const double n = samples;
  double mx = 0.0;
  double my = 0.0;
  for (int s = 0; s < samples; ++s) {
    mx += fit.radii[static_cast<std::size_t>(s)];
    my += ys[static_cast<std::size_t>(s)];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double dx = fit.radii[static_cast<std::size_t>(s)] - mx;
    const double dy = ys[static_cast<std::size_t>(s)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double e = ys[static_cast<std::size_t>(s)] -
                     (fit.intercept + fit.slope * fit.radii[static_cast<std::size_t>(s)]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  fit.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
  return fit;
}

double bilinear(const Grid& grid, const Vector& nodal, double x, double y) {
  const double h = grid.h();
  const int last = grid.cells() - 1;
  const auto locate = [&](double c, int& i, double& t) {
    if (c < 0.0 || c > grid.R()) throw std::domain_error("bilinear: point outside [0, R]^2");
    i = std::min(static_cast<int>(std::floor(c / h)), last);
    t = c / h - i;
  };
  const auto at = [&](int i, int j) {
    return (i < grid.n() && j < grid.n()) ? nodal[grid.index(i, j)] : 0.0;
  };
  int i = 0;
  int j = 0;
  double tx = 0.0;
  double ty = 0.0;
  locate(x, i, tx);
  locate(y, j, ty);
  return (1.0 - tx) * ((1.0 - ty) * at(i, j) + ty * at(i, j + 1)) +
         tx * ((1.0 - ty) * at(i + 1, j) + ty * at(i + 1, j + 1));
}

std::pair<double, double> default_decay_window(const DiscreteForm& form) {
  const double lo = form.support_bound + 2.0;
  const double hi = form.grid.R() - 3.0;
  if (hi > lo) return {lo, hi};
  // Small boxes: use everything the fit accepts.
  return {form.support_bound + 1.0, form.grid.R() - 2.0};
}

DecayFit decay_fit(const DiscreteForm& form, const Vector& v, double energy, Ray ray, double r_min,
                   double r_max, int samples, bool with_prefactor) {
  if (!std::isfinite(form.support_bound)) {
    throw std::invalid_argument("decay_fit: the decay bound needs compactly supported sigma");
  }
  if (r_min < form.support_bound + 1.0 || r_max > form.grid.R() - 2.0) {
    throw std::invalid_argument(fmt::format(
        "decay_fit: window [{}, {}] must lie in [support + 1, R - 2] = [{}, {}]", r_min, r_max,
        form.support_bound + 1.0, form.grid.R() - 2.0));
  }
  const Vector nodal = form.unweigh(v);
  const double scale = nodal.cwiseAbs().maxCoeff();
  const Grid& grid = form.grid;
  return decay_fit([&](double x, double y) { return bilinear(grid, nodal, x, y); }, energy, ray,
                   r_min, r_max, samples, with_prefactor, 1e-14 * scale);
}

TruncationBracket truncation_bracket(const BoundaryPotential& p, double R, double h, int k,
                                     const SolverOptions& options) {
  SolverOptions opts = options;
  opts.k = k;
  const auto neumann = lowest_eigenpairs(assemble(p, Grid(R, h, OuterBoundary::Neumann)), opts);
  const auto dirichlet = lowest_eigenpairs(assemble(p, Grid(R, h, OuterBoundary::Dirichlet)), opts);

  TruncationBracket b;
  b.ess_bottom = ess_spectrum_class(p).bottom.value_or(0.0);
  b.lo = neumann.eigenvalues;
  b.hi = dirichlet.eigenvalues;
  for (std::size_t m = 0; m < b.hi.size(); ++m) b.enclosed.push_back(b.hi[m] < b.ess_bottom);
  return b;
}

ConvergenceStudy richardson(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("richardson: need at least 3 points");
  std::vector<std::pair<double, double>> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double ratio = sorted[i].first / sorted[i + 1].first;
    if (std::abs(ratio - 2.0) > 1e-9) {
      throw std::invalid_argument(fmt::format("richardson: h ratio {} is not 2", ratio));
    }
  }

  ConvergenceStudy study;
  for (const auto& [h, lambda] : sorted) {
    study.h_values.push_back(h);
    study.lambda_values.push_back(lambda);
  }
  const std::size_t last = sorted.size() - 1;
  const double coarse = sorted[last - 2].second;
  const double mid = sorted[last - 1].second;
  const double fine = sorted[last].second;
  const double d1 = coarse - mid;
  const double d2 = mid - fine;
  if (d2 == 0.0 || d1 * d2 <= 0.0 || std::abs(d1) <= std::abs(d2)) {
    throw NoAsymptoticRegimeError(
        fmt::format("richardson: differences {} and {} are not monotone decreasing", d1, d2));
  }
  study.order = std::log2(d1 / d2);
  study.extrapolated = fine + (fine - mid) / (std::exp2(study.order) - 1.0);
  return study;
}

}  // namespace robinlab
