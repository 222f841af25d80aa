// Command-line front end: every command reads one experiment config.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  int workers = 1;
};

int execute(const Flags& flags, std::vector<robinlab::Task> tasks) {
  try {
    const robinlab::ExperimentConfig config = robinlab::load_config(flags.config);
    if (flags.workers < 1) throw robinlab::ConfigError("--workers must be at least 1");
    robinlab::RunOptions options;
    options.workers = flags.workers;
    if (!flags.out.empty()) options.output_dir = flags.out;
    const auto summary = robinlab::run(config, std::move(tasks), options);
    for (const auto& w : summary.warnings) fmt::print(stderr, "warning: {}\n", w);
    for (const auto& f : summary.files) {
      fmt::print("{}\n", (summary.output_dir / f).string());
    }
    return 0;
  } catch (const std::exception& e) {
    fmt::print(stderr, "robinlab: {}\n", e.what());
    return robinlab::exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robin boundary eigenproblems on the quarter-plane"};
  app.set_version_flag("--version", std::string(ROBINLAB_TOOL_VERSION));
  app.require_subcommand(1);

  Flags flags;
  app.add_option("--config", flags.config, "experiment config file")->required();
  app.add_option("--out", flags.out, "output directory (overrides output_dir)");
  app.add_option("--workers", flags.workers, "concurrent sweep points")->check(CLI::PositiveNumber);

  struct Command {
    const char* name;
    const char* help;
    std::vector<robinlab::Task> tasks;
  };
  const std::vector<Command> commands = {
      {"run", "every task listed in the config", {}},
      {"solve", "lowest eigenpairs on each grid", {robinlab::Task::Solve}},
      {"bounds", "a priori bounds report", {robinlab::Task::Bounds}},
      {"certify", "bound-state certificate", {robinlab::Task::Certify}},
      {"roots1d", "interval Robin spectrum as CSV", {robinlab::Task::Roots1d}},
      {"reference", "exact constant-sigma solution", {robinlab::Task::Reference}},
      {"decay", "ground-state decay fit", {robinlab::Task::Decay}},
      {"sweep", "bounds (and solves) over a parameter grid", {robinlab::Task::Sweep}},
  };
  std::vector<robinlab::Task> selected;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->fallthrough();
    sub->callback([&selected, tasks = c.tasks] { selected = tasks; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return execute(flags, std::move(selected));
}
