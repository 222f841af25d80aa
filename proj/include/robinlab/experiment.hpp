#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "robinlab/analysis.hpp"
#include "robinlab/certify.hpp"
#include "robinlab/eigensolve.hpp"
#include "robinlab/potential.hpp"

namespace robinlab {

enum class Task { Solve, Bounds, Certify, Roots1d, Reference, Decay, Sweep };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

struct Roots1dSettings {
  std::optional<double> sigma_hat;  // default: ess_sup of the potential
  std::optional<double> L;          // default: support bound
  std::optional<double> k_max;      // default: 10 pi / L
};

struct DecaySettings {
  Ray ray = Ray::diagonal();
  std::optional<double> r_min;  // default window [support + 2, R - 3]
  std::optional<double> r_max;
  int radii = 40;
  bool with_prefactor = true;
};

struct SweepParameter {
  std::string name;  // "sigma" or "L"
  std::vector<double> values;
};

struct SweepSettings {
  std::vector<SweepParameter> parameters;  // one or two, first varies slowest
  bool solve = false;
};

inline constexpr std::size_t kSweepBoundsBudget = 10000;
inline constexpr std::size_t kSweepSolveBudget = 100;

/// Parsed experiment file. Parsing is strict: unknown keys, wrong types and
/// inconsistent values raise ConfigError.
struct ExperimentConfig {
  nlohmann::json potential_spec;
  BoundaryPotential potential = BoundaryPotential::constant(0.0);
  double R = 12.0;
  std::vector<double> h_values{0.05};  // descending
  std::vector<OuterBoundary> outer{OuterBoundary::Dirichlet};
  SolverOptions solver;
  bool dump_matrix = false;
  int n_max = 1000;
  Roots1dSettings roots1d;
  DecaySettings decay;
  SweepSettings sweep;
  std::vector<Task> tasks;
  std::filesystem::path output_dir = "out";
  std::string source_text;  // raw bytes, hashed into the manifest
};

BoundaryPotential potential_from_json(const nlohmann::json& spec);
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // overrides the config
  int workers = 1;
};

struct RunSummary {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // relative to output_dir, manifest last
  std::vector<std::string> warnings;
  double wall_time_seconds = 0.0;
};

/// Runs `tasks` (the config's own list when empty) and writes one result
/// file per task plus manifest.json. Result files depend only on the config.
RunSummary run(const ExperimentConfig& config, std::vector<Task> tasks, const RunOptions& options);

/// Flat object, absent entries omitted.
nlohmann::json to_json(const BoundsReport& report);

/// 2 config, 3 non-convergence / factorization, 4 inapplicable analysis, 1 other.
int exit_code_for(const std::exception& error);

/// "%.17g".
std::string format_real(double value);

/// Lowercase hex SHA-256 of bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace robinlab
