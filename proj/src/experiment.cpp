#include "robinlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "robinlab/analytic1d.hpp"
#include "robinlab/discretize.hpp"
#include "robinlab/errors.hpp"

#ifndef ROBINLAB_VERSION
#define ROBINLAB_VERSION "unknown"
#endif

namespace robinlab {

using nlohmann::json;

namespace {

constexpr std::pair<Task, std::string_view> kTaskNames[] = {
    {Task::Solve, "solve"},     {Task::Bounds, "bounds"},       {Task::Certify, "certify"},
    {Task::Roots1d, "roots1d"}, {Task::Reference, "reference"}, {Task::Decay, "decay"},
    {Task::Sweep, "sweep"},
};

// Strict view of one JSON object: every key must be declared up front.
class Section {
 public:
  Section(const json& node, std::string path, std::initializer_list<std::string_view> keys)
      : node_(node), path_(std::move(path)) {
    if (!node.is_object()) throw ConfigError(fmt::format("{}: expected an object", path_));
    for (const auto& [key, value] : node.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError(fmt::format("{}: unknown key '{}'", path_, key));
      }
    }
  }

  bool has(const char* key) const { return node_.contains(key); }
  const json& at(const char* key) const { return node_.at(key); }
  std::string where(const char* key) const { return fmt::format("{}.{}", path_, key); }

  const json& required(const char* key) const {
    if (!has(key)) throw ConfigError(fmt::format("{}: missing key '{}'", path_, key));
    return at(key);
  }

  double number(const char* key) const { return as_number(required(key), where(key)); }
  double number(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> maybe_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", where(key)));
    return v.get<int>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", where(key)));
    return v.get<bool>();
  }

  std::string string(const char* key, std::string fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(fmt::format("{}: expected a string", where(key)));
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) const {
    return as_numbers(required(key), where(key));
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", where));
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(fmt::format("{}: not finite", where));
    return x;
  }

  static std::vector<double> as_numbers(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(fmt::format("{}: expected a list of numbers", where));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], fmt::format("{}[{}]", where, i)));
    }
    return out;
  }

 private:
  const json& node_;
  std::string path_;
};

template <class F>
auto config_guard(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

SolverMethod method_from_string(const std::string& name) {
  if (name == "auto") return SolverMethod::Auto;
  if (name == "shift-invert") return SolverMethod::ShiftInvert;
  if (name == "dense") return SolverMethod::Dense;
  throw ConfigError(fmt::format("solver.method: '{}' is not auto, shift-invert or dense", name));
}

std::string h_label(double h) { return fmt::format("{}", h); }

// ---------------------------------------------------------------- output

struct Output {
  std::string name;
  std::string content;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json sandwich_json(const EnergySandwich& s) { return json{{"lo", s.lo}, {"hi", s.hi}}; }

json fit_json(const DecayFit& fit, const std::string& source) {
  return json{{"source", source},
              {"ray", {fit.ray.dx, fit.ray.dy}},
              {"r_min", fit.r_min},
              {"r_max", fit.r_max},
              {"samples", fit.samples},
              {"with_prefactor", fit.with_prefactor},
              {"slope", fit.slope},
              {"intercept", fit.intercept},
              {"r_squared", fit.r_squared},
              {"slope_stderr", fit.slope_stderr},
              {"predicted_rate", fit.predicted_rate},
              {"relative_rate_error", std::abs(fit.slope / fit.predicted_rate - 1.0)}};
}

// Cache of solves keyed by (outer, h) so decay can reuse the solve task.
struct SolveKey {
  OuterBoundary outer;
  double h;
  bool operator<(const SolveKey& o) const {
    return std::tie(outer, h) < std::tie(o.outer, o.h);
  }
};

struct Solved {
  DiscreteForm form;
  SpectralResult result;
};

class Runner {
 public:
  Runner(const ExperimentConfig& config, const RunOptions& options)
      : config_(config), options_(options) {}

  std::vector<Output> task(Task t) {
    switch (t) {
      case Task::Reference: return reference();
      case Task::Bounds: return bounds();
      case Task::Certify: return certify();
      case Task::Roots1d: return roots1d();
      case Task::Solve: return solve();
      case Task::Decay: return decay();
      case Task::Sweep: return sweep();
    }
    return {};
  }

 private:
  const Solved& solved(OuterBoundary outer, double h, int k) {
    const SolveKey key{outer, h};
    auto it = cache_.find(key);
    if (it == cache_.end() || static_cast<int>(it->second.result.eigenvalues.size()) < k) {
      DiscreteForm form = assemble(config_.potential, Grid(config_.R, h, outer));
      SolverOptions opts = config_.solver;
      opts.k = k;
      SpectralResult result = lowest_eigenpairs(form, opts);
      it = cache_.insert_or_assign(key, Solved{std::move(form), std::move(result)}).first;
    }
    return it->second;
  }

  std::vector<Output> reference() {
    const BoundaryPotential& p = config_.potential;
    const bool exact = std::holds_alternative<ConstantSigma>(p.kind());
    const double sigma = p.ess_sup();
    if (!(sigma > 0.0)) {
      throw InapplicableError(InapplicableError::Reason::NotAttractiveOnAverage,
                              "reference: needs a positive (essential supremum of) sigma");
    }
    const ConstantReference ref = constant_reference(sigma);
    json j{{"potential", p.id()},
           {"sigma", sigma},
           {"exact", exact},
           {"ground_energy", ref.ground_energy},
           {"ess_bottom", ref.ess_bottom},
           {"halfline_energy", halfline_bound_state(sigma).energy},
           {"ground_state_at_origin", ref.ground_state(0.0, 0.0)}};
    return {{"reference.json", dump(j)}};
  }

  std::vector<Output> bounds() {
    json j = to_json(full_report(config_.potential, config_.n_max));
    j["potential"] = config_.potential.id();
    return {{"bounds.json", dump(j)}};
  }

  std::vector<Output> certify() {
    const auto certificate = bound_state_certificate(config_.potential, config_.n_max);
    BoundsReport report = full_report(config_.potential, config_.n_max);
    report.certificate = certificate;
    json j = to_json(report);
    j["potential"] = config_.potential.id();
    j["n_max"] = config_.n_max;
    j["certified"] = certificate.has_value();
    return {{"certify.json", dump(j)}};
  }

  std::vector<Output> roots1d() {
    const BoundaryPotential& p = config_.potential;
    const double s = config_.roots1d.sigma_hat.value_or(p.ess_sup());
    double L = 0.0;
    if (config_.roots1d.L) {
      L = *config_.roots1d.L;
    } else if (p.has_infinite_support()) {
      throw InapplicableError(InapplicableError::Reason::InfiniteSupport,
                              "roots1d: sigma has unbounded support; set roots1d.L");
    } else {
      L = p.support_bound();
    }
    if (!(s > 0.0 && L > 0.0)) {
      throw InapplicableError(InapplicableError::Reason::NotAttractiveOnAverage,
                              "roots1d: needs sigma_hat > 0 and L > 0");
    }
    const double k_max = config_.roots1d.k_max.value_or(10.0 * std::numbers::pi / L);
    const Interval1DSpectrum spec = interval_spectrum(s, L, k_max);

    std::string csv = "index,kind,k_or_kappa,eigenvalue,residual\n";
    int index = 0;
    const auto row = [&](std::string_view kind, double k, double e, double res) {
      csv += fmt::format("{},{},{},{},{}\n", index++, kind, format_real(k), format_real(e),
                         format_real(res));
    };
    row("negative", spec.kappa, -spec.kappa * spec.kappa,
        std::abs(spec.kappa * std::tanh(spec.kappa * L / 2.0) - s));
    if (spec.has_zero_mode) row("zero", 0.0, 0.0, std::abs(s * L - 2.0));
    for (double k : spec.positive_roots) {
      row("positive", k, k * k, std::abs(interval_root_function(k, s, L)));
    }
    return {{"roots1d.csv", csv}};
  }

  std::vector<Output> solve() {
    const BoundaryPotential& p = config_.potential;
    const auto ess = ess_spectrum_class(p);
    json runs = json::array();
    std::string csv = "outer_bc,h,index,eigenvalue,residual\n";
    std::vector<Output> dumps;
    std::map<OuterBoundary, std::vector<std::pair<double, double>>> ground;

    for (OuterBoundary outer : config_.outer) {
      for (double h : config_.h_values) {
        const Solved& s = solved(outer, h, config_.solver.k);
        const auto& r = s.result;
        json run{{"outer_bc", to_string(outer)},
                 {"h", h},
                 {"dimension", s.form.matrix.rows()},
                 {"eigenvalues", r.eigenvalues},
                 {"residuals", r.residuals},
                 {"method", r.method},
                 {"shift", r.shift},
                 {"restarts", r.restarts},
                 {"count_below_zero", count_below_perturbed(s.form.matrix, 0.0)},
                 {"ground_state_positive",
                  ground_state_positivity(r.eigenvectors.col(0), 1e-8)}};
        if (ess.bottom && *ess.bottom != 0.0) {
          run["count_below_ess_bottom"] = count_below_perturbed(s.form.matrix, *ess.bottom);
        }
        runs.push_back(run);
        for (std::size_t m = 0; m < r.eigenvalues.size(); ++m) {
          csv += fmt::format("{},{},{},{},{}\n", to_string(outer), format_real(h), m,
                             format_real(r.eigenvalues[m]), format_real(r.residuals[m]));
        }
        ground[outer].emplace_back(h, r.eigenvalues.front());
        if (config_.dump_matrix) {
          std::ostringstream os;
          write_coordinate(s.form, os);
          dumps.push_back({fmt::format("matrix_{}_h{}.txt", to_string(outer), h_label(h)), os.str()});
        }
      }
    }

    json j{{"potential", p.id()},
           {"R", config_.R},
           {"recommended_radius", recommended_radius(p)},
           {"crude_lower", crude_lower_bound(p.ess_sup())},
           {"sandwich", sandwich_json(ground_energy_sandwich(p))},
           {"runs", runs}};
    if (ess.bottom) j["ess_bottom"] = *ess.bottom;

    if (config_.h_values.size() >= 3) {
      json rich = json::object();
      for (const auto& [outer, points] : ground) {
        try {
          const ConvergenceStudy study = richardson(points);
          rich[std::string(to_string(outer))] =
              json{{"extrapolated", study.extrapolated}, {"order", study.order}};
        } catch (const NoAsymptoticRegimeError& e) {
          rich[std::string(to_string(outer))] = json{{"error", e.what()}};
        }
      }
      j["richardson"] = rich;
    }

    if (ground.count(OuterBoundary::Dirichlet) && ground.count(OuterBoundary::Neumann)) {
      json bracket = json::array();
      const auto& lo = ground[OuterBoundary::Neumann];
      const auto& hi = ground[OuterBoundary::Dirichlet];
      for (std::size_t i = 0; i < lo.size(); ++i) {
        bracket.push_back(json{{"h", lo[i].first},
                               {"lo", lo[i].second},
                               {"hi", hi[i].second},
                               {"width", hi[i].second - lo[i].second}});
      }
      j["bracket"] = bracket;
    }

    std::vector<Output> out{{"solve.json", dump(j)}, {"eigenvalues.csv", csv}};
    for (auto& d : dumps) out.push_back(std::move(d));
    return out;
  }

  std::vector<Output> decay() {
    const BoundaryPotential& p = config_.potential;
    const DecaySettings& d = config_.decay;
    DecayFit fit;
    std::string source;
    double energy = 0.0;

    if (std::holds_alternative<ConstantSigma>(p.kind())) {
      const double sigma = p.ess_sup();
      if (!(sigma > 0.0)) {
        throw InapplicableError(InapplicableError::Reason::NotAttractiveOnAverage,
                                "decay: constant sigma must be positive");
      }
      const ConstantReference ref = constant_reference(sigma);
      energy = ref.ground_energy;
      source = "analytic";
      const double r_min = d.r_min.value_or(2.0);
      const double r_max = d.r_max.value_or(config_.R - 3.0);
      fit = decay_fit([&](double x, double y) { return ref.ground_state(x, y); }, energy, d.ray,
                      r_min, r_max, d.radii, d.with_prefactor);
    } else {
      if (p.has_infinite_support()) {
        throw InapplicableError(InapplicableError::Reason::InfiniteSupport,
                                "decay: the decay estimate needs compactly supported sigma");
      }
      const double h = config_.h_values.back();
      const Solved& s = solved(config_.outer.front(), h, 1);
      energy = s.result.eigenvalues.front();
      if (!(energy < 0.0)) {
        throw InapplicableError(InapplicableError::Reason::NotAttractiveOnAverage,
                                fmt::format("decay: computed ground energy {} is not negative", energy));
      }
      const auto [lo, hi] = default_decay_window(s.form);
      if (!(d.r_max.value_or(hi) > d.r_min.value_or(lo))) {
        throw ConfigError(fmt::format("decay: no room for a fit window between support and R = {}", config_.R));
      }
      source = fmt::format("{} h={}", to_string(s.form.outer()), h_label(h));
      fit = decay_fit(s.form, s.result.eigenvectors.col(0), energy, d.ray, d.r_min.value_or(lo),
                      d.r_max.value_or(hi), d.radii, d.with_prefactor);
    }

    // Model c e^{-sqrt|E| r} [/ sqrt r] with c fitted at the predicted rate.
    const double rate = std::sqrt(-energy);
    const auto shape = [&](double r) {
      return std::exp(-rate * r) / (d.with_prefactor ? std::sqrt(r) : 1.0);
    };
    double log_c = 0.0;
    for (std::size_t i = 0; i < fit.radii.size(); ++i) {
      log_c += std::log(fit.values[i]) - std::log(shape(fit.radii[i]));
    }
    log_c /= static_cast<double>(fit.radii.size());
    const double c = std::exp(log_c);

    std::string csv = "r,abs_phi,model\n";
    for (std::size_t i = 0; i < fit.radii.size(); ++i) {
      csv += fmt::format("{},{},{}\n", format_real(fit.radii[i]), format_real(fit.values[i]),
                         format_real(c * shape(fit.radii[i])));
    }
    json j = fit_json(fit, source);
    j["energy"] = energy;
    j["model_constant"] = c;
    j["potential"] = p.id();
    return {{"decay.csv", csv}, {"decay.json", dump(j)}};
  }

  std::vector<Output> sweep() {
    const SweepSettings& sw = config_.sweep;
    if (sw.parameters.empty()) {
      throw ConfigError("sweep: the sweep section is missing or has no parameters");
    }
    std::size_t total = 1;
    for (const auto& prm : sw.parameters) total *= prm.values.size();

    std::string header;
    for (const auto& prm : sw.parameters) header += prm.name + ",";
    header += "E_lo,E_hi,count_bound,E_computed,negative_count\n";

    std::vector<std::string> rows(total);
    const auto point = [&](std::size_t idx) {
      std::vector<double> values(sw.parameters.size());
      std::size_t rest = idx;
      for (std::size_t q = sw.parameters.size(); q-- > 0;) {
        const auto& v = sw.parameters[q].values;
        values[q] = v[rest % v.size()];
        rest /= v.size();
      }
      const BoundaryPotential p = sweep_potential(values);
      const EnergySandwich s = ground_energy_sandwich(p);
      std::string count;
      if (!p.has_infinite_support()) {
        if (const auto c = negative_count_bound(p)) count = std::to_string(*c);
      }
      std::string computed;
      std::string negatives;
      if (sw.solve) {
        DiscreteForm form = assemble(p, Grid(config_.R, config_.h_values.back(), config_.outer.front()));
        SolverOptions opts = config_.solver;
        opts.k = 1;
        computed = format_real(lowest_eigenpairs(form, opts).eigenvalues.front());
        negatives = std::to_string(count_below_perturbed(form.matrix, 0.0));
      }
      std::string row;
      for (double v : values) row += format_real(v) + ",";
      row += fmt::format("{},{},{},{},{}\n", format_real(s.lo), format_real(s.hi), count, computed,
                         negatives);
      return row;
    };

    const std::size_t workers =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options_.workers, 1)), 1,
                                std::max<std::size_t>(total, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::size_t failed_at = total;
    std::mutex guard;
    const auto work = [&] {
      for (std::size_t idx = next++; idx < total; idx = next++) {
        try {
          rows[idx] = point(idx);
        } catch (...) {
          std::lock_guard lock(guard);
          // Report the first failing point in grid order, independent of scheduling.
          if (idx < failed_at) {
            failed_at = idx;
            failure = std::current_exception();
          }
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    std::string csv = header;
    for (const auto& r : rows) csv += r;
    return {{"sweep.csv", csv}};
  }

  BoundaryPotential sweep_potential(const std::vector<double>& values) const {
    const auto& kind = config_.potential.kind();
    double sigma = 0.0;
    double L = 0.0;
    if (const auto* c = std::get_if<ConstantSigma>(&kind)) sigma = c->sigma;
    if (const auto* st = std::get_if<StepSigma>(&kind)) {
      sigma = st->sigma;
      L = st->L;
    }
    for (std::size_t q = 0; q < values.size(); ++q) {
      (config_.sweep.parameters[q].name == "sigma" ? sigma : L) = values[q];
    }
    return std::holds_alternative<StepSigma>(kind) ? BoundaryPotential::step(sigma, L)
                                                   : BoundaryPotential::constant(sigma);
  }

  const ExperimentConfig& config_;
  const RunOptions& options_;
  std::map<SolveKey, Solved> cache_;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "?";
}

Task task_from_string(std::string_view name) {
  for (const auto& [t, n] : kTaskNames) {
    if (n == name) return t;
  }
  throw ConfigError(fmt::format("unknown task '{}'", name));
}

BoundaryPotential potential_from_json(const json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
    throw ConfigError("potential: expected an object with a string 'kind'");
  }
  const std::string kind = spec["kind"].get<std::string>();
  return config_guard("potential", [&] {
    if (kind == "constant") {
      const Section s(spec, "potential", {"kind", "sigma"});
      return BoundaryPotential::constant(s.number("sigma"));
    }
    if (kind == "step") {
      const Section s(spec, "potential", {"kind", "sigma", "L"});
      return BoundaryPotential::step(s.number("sigma"), s.number("L"));
    }
    if (kind == "piecewise") {
      const Section s(spec, "potential", {"kind", "breaks", "values"});
      return BoundaryPotential::piecewise(s.numbers("breaks"), s.numbers("values"));
    }
    if (kind == "tabulated") {
      const Section s(spec, "potential", {"kind", "spacing", "samples"});
      return BoundaryPotential::tabulated(s.number("spacing"), s.numbers("samples"));
    }
    throw ConfigError(fmt::format(
        "potential.kind: '{}' is not constant, step, piecewise or tabulated", kind));
  });
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }

  ExperimentConfig c;
  c.source_text = std::string(text);
  const Section top(root, "config",
                    {"potential", "grid", "outer_bc", "solver", "certify", "roots1d", "decay",
                     "sweep", "tasks", "output_dir"});

  c.potential_spec = top.required("potential");
  c.potential = potential_from_json(c.potential_spec);

  if (top.has("grid")) {
    const Section g(top.at("grid"), "grid", {"R", "h"});
    c.R = g.number("R", c.R);
    if (g.has("h")) {
      const json& h = g.at("h");
      c.h_values = h.is_array() ? Section::as_numbers(h, "grid.h")
                                : std::vector<double>{Section::as_number(h, "grid.h")};
    }
  }
  if (c.h_values.empty()) throw ConfigError("grid.h: empty list");
  std::sort(c.h_values.begin(), c.h_values.end(), std::greater<>());
  if (std::adjacent_find(c.h_values.begin(), c.h_values.end()) != c.h_values.end()) {
    throw ConfigError("grid.h: repeated value");
  }
  for (double h : c.h_values) {
    config_guard(fmt::format("grid (R={}, h={})", c.R, h),
                 [&] { return Grid(c.R, h, OuterBoundary::Dirichlet).size(); });
  }
  if (c.h_values.size() >= 3) {
    for (std::size_t i = 0; i + 1 < c.h_values.size(); ++i) {
      if (std::abs(c.h_values[i] / c.h_values[i + 1] - 2.0) > 1e-9) {
        throw ConfigError("grid.h: three or more spacings must halve successively (extrapolation)");
      }
    }
  }

  if (top.has("outer_bc")) {
    const json& o = top.at("outer_bc");
    std::vector<std::string> names;
    if (o.is_string() && o.get<std::string>() == "both") {
      names = {"dirichlet", "neumann"};
    } else if (o.is_string()) {
      names = {o.get<std::string>()};
    } else if (o.is_array()) {
      for (const auto& e : o) {
        if (!e.is_string()) throw ConfigError("outer_bc: expected strings");
        names.push_back(e.get<std::string>());
      }
    } else {
      throw ConfigError("outer_bc: expected \"dirichlet\", \"neumann\", \"both\" or a list");
    }
    c.outer.clear();
    for (const auto& n : names) {
      const OuterBoundary bc = config_guard("outer_bc", [&] { return outer_boundary_from_string(n); });
      if (std::find(c.outer.begin(), c.outer.end(), bc) != c.outer.end()) {
        throw ConfigError("outer_bc: repeated entry");
      }
      c.outer.push_back(bc);
    }
    if (c.outer.empty()) throw ConfigError("outer_bc: empty list");
  }

  if (top.has("solver")) {
    const Section s(top.at("solver"), "solver", {"k", "tol", "method", "max_restarts", "dump_matrix"});
    c.solver.k = s.integer("k", c.solver.k);
    c.solver.tol = s.number("tol", c.solver.tol);
    c.solver.method = method_from_string(s.string("method", "auto"));
    c.solver.max_restarts = s.integer("max_restarts", c.solver.max_restarts);
    c.dump_matrix = s.boolean("dump_matrix", false);
    if (c.solver.k < 1) throw ConfigError("solver.k: must be at least 1");
    if (!(c.solver.tol > 0.0)) throw ConfigError("solver.tol: must be positive");
    if (c.solver.max_restarts < 1) throw ConfigError("solver.max_restarts: must be at least 1");
  }

  if (top.has("certify")) {
    const Section s(top.at("certify"), "certify", {"n_max"});
    c.n_max = s.integer("n_max", c.n_max);
    if (c.n_max < 1) throw ConfigError("certify.n_max: must be at least 1");
  }

  if (top.has("roots1d")) {
    const Section s(top.at("roots1d"), "roots1d", {"sigma_hat", "L", "k_max"});
    c.roots1d.sigma_hat = s.maybe_number("sigma_hat");
    c.roots1d.L = s.maybe_number("L");
    c.roots1d.k_max = s.maybe_number("k_max");
    if (c.roots1d.k_max && !(*c.roots1d.k_max > 0.0)) {
      throw ConfigError("roots1d.k_max: must be positive");
    }
  }

  if (top.has("decay")) {
    const Section s(top.at("decay"), "decay", {"ray", "r_min", "r_max", "radii", "with_prefactor"});
    if (s.has("ray")) {
      const json& r = s.at("ray");
      if (r.is_string() && r.get<std::string>() == "diagonal") {
        c.decay.ray = Ray::diagonal();
      } else if (r.is_string() && r.get<std::string>() == "axis") {
        c.decay.ray = Ray::axis();
      } else if (r.is_array()) {
        const auto v = Section::as_numbers(r, "decay.ray");
        if (v.size() != 2) throw ConfigError("decay.ray: expected [dx, dy]");
        c.decay.ray = config_guard("decay.ray", [&] { return Ray::normalized(v[0], v[1]); });
      } else {
        throw ConfigError("decay.ray: expected \"diagonal\", \"axis\" or [dx, dy]");
      }
    }
    c.decay.r_min = s.maybe_number("r_min");
    c.decay.r_max = s.maybe_number("r_max");
    c.decay.radii = s.integer("radii", c.decay.radii);
    c.decay.with_prefactor = s.boolean("with_prefactor", c.decay.with_prefactor);
    if (c.decay.radii < 10) throw ConfigError("decay.radii: need at least 10");
  }

  if (top.has("sweep")) {
    const Section s(top.at("sweep"), "sweep", {"parameters", "solve"});
    c.sweep.solve = s.boolean("solve", false);
    const json& params = s.required("parameters");
    if (!params.is_array() || params.empty() || params.size() > 2) {
      throw ConfigError("sweep.parameters: expected a list of one or two parameters");
    }
    const bool step = std::holds_alternative<StepSigma>(c.potential.kind());
    if (!step && !std::holds_alternative<ConstantSigma>(c.potential.kind())) {
      throw ConfigError("sweep: only constant and step potentials can be swept");
    }
    std::size_t total = 1;
    for (std::size_t q = 0; q < params.size(); ++q) {
      const std::string where = fmt::format("sweep.parameters[{}]", q);
      const Section prm(params[q], where, {"name", "values"});
      SweepParameter sp{prm.string("name", ""), prm.numbers("values")};
      if (sp.name != "sigma" && sp.name != "L") {
        throw ConfigError(fmt::format("{}.name: expected \"sigma\" or \"L\"", where));
      }
      if (sp.name == "L" && !step) throw ConfigError(fmt::format("{}: L needs a step potential", where));
      for (const auto& other : c.sweep.parameters) {
        if (other.name == sp.name) throw ConfigError(fmt::format("{}: repeated parameter", where));
      }
      for (double v : sp.values) {
        if (sp.name == "L" && !(v > 0.0)) throw ConfigError(fmt::format("{}: L must be positive", where));
      }
      total *= sp.values.size();
      c.sweep.parameters.push_back(std::move(sp));
    }
    const std::size_t budget = c.sweep.solve ? kSweepSolveBudget : kSweepBoundsBudget;
    if (total > budget) {
      throw ConfigError(fmt::format("sweep: {} points exceed the budget of {}{}", total, budget,
                                    c.sweep.solve ? " for full solves" : ""));
    }
  }

  if (top.has("tasks")) {
    const json& t = top.at("tasks");
    if (!t.is_array()) throw ConfigError("tasks: expected a list");
    for (const auto& e : t) {
      if (!e.is_string()) throw ConfigError("tasks: expected task names");
      const Task task = task_from_string(e.get<std::string>());
      if (std::find(c.tasks.begin(), c.tasks.end(), task) != c.tasks.end()) {
        throw ConfigError(fmt::format("tasks: '{}' listed twice", to_string(task)));
      }
      c.tasks.push_back(task);
    }
  }
  if (std::find(c.tasks.begin(), c.tasks.end(), Task::Sweep) != c.tasks.end() &&
      c.sweep.parameters.empty()) {
    throw ConfigError("tasks: sweep requested without a sweep section");
  }

  if (top.has("output_dir")) {
    const json& o = top.at("output_dir");
    if (!o.is_string()) throw ConfigError("output_dir: expected a path string");
    c.output_dir = o.get<std::string>();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str());
}

RunSummary run(const ExperimentConfig& config, std::vector<Task> tasks, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (tasks.empty()) tasks = config.tasks;
  if (std::find(tasks.begin(), tasks.end(), Task::Sweep) != tasks.end() &&
      config.sweep.parameters.empty()) {
    throw ConfigError("sweep: the config has no sweep section");
  }

  RunSummary summary;
  summary.output_dir = options.output_dir.value_or(config.output_dir);
  std::filesystem::create_directories(summary.output_dir);

  const bool grid_tasks = std::any_of(tasks.begin(), tasks.end(), [&](Task t) {
    return t == Task::Solve || (t == Task::Decay && !std::holds_alternative<ConstantSigma>(
                                                        config.potential.kind())) ||
           (t == Task::Sweep && config.sweep.solve);
  });
  if (grid_tasks && config.R < recommended_radius(config.potential)) {
    summary.warnings.push_back(fmt::format(
        "R = {} is below the recommended radius {:.3g}; truncation may dominate", config.R,
        recommended_radius(config.potential)));
  }

  Runner runner(config, options);
  json files = json::array();
  for (Task t : tasks) {
    for (const Output& out : runner.task(t)) {
      write_file(summary.output_dir / out.name, out.content);
      summary.files.push_back(out.name);
      files.push_back(json{{"path", out.name},
                           {"sha256", sha256_hex(out.content)},
                           {"bytes", out.content.size()}});
    }
  }

  json task_names = json::array();
  for (Task t : tasks) task_names.push_back(to_string(t));
  summary.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest{{"tool", "robinlab"},
                      {"version", ROBINLAB_VERSION},
                      {"config_sha256", sha256_hex(config.source_text)},
                      {"potential", config.potential.id()},
                      {"tasks", task_names},
                      {"files", files},
                      {"wall_time_seconds", summary.wall_time_seconds}};
  write_file(summary.output_dir / "manifest.json", dump(manifest));
  summary.files.push_back("manifest.json");
  return summary;
}

json to_json(const BoundsReport& r) {
  json j{{"sigma_hat", r.sigma_hat},
         {"crude_lower", r.crude_lower},
         {"sandwich_lo", r.sandwich_lo},
         {"sandwich_hi", r.sandwich_hi},
         {"ess_class", to_string(r.ess_class)},
         {"count_bound_applicable", r.count_bound_applicable}};
  if (r.ess_bottom) j["ess_bottom"] = *r.ess_bottom;
  if (r.count_bound) j["count_bound"] = *r.count_bound;
  if (r.certificate) {
    j["certificate_n"] = r.certificate->n;
    j["certificate_q"] = r.certificate->q_value;
    j["certificate_kinetic"] = r.certificate->kinetic;
    j["certificate_potential_term"] = r.certificate->potential_term;
  }
  return j;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return 2;
  if (dynamic_cast<const ConvergenceError*>(&error)) return 3;
  if (dynamic_cast<const FactorizationError*>(&error)) return 3;
  if (dynamic_cast<const InapplicableError*>(&error)) return 4;
  return 1;
}

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace robinlab
