#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "senserf/errors.hpp"
#include "senserf/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<unsigned> workers;
  std::string out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("config", o.config, "Experiment config file")->required();
  cmd->add_option("--seed", o.seed, "Monte Carlo seed");
  cmd->add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", o.workers, "Monte Carlo worker threads (0 = all cores)");
  cmd->add_option("--out", o.out, "Output CSV path (default: config's output, else stdout)");
}

int execute(const Overrides& o, bool force_validate) {
  senserf::ExperimentSpec spec;
  try {
    spec = senserf::load_experiment(o.config);
    if (force_validate) spec.kind = senserf::ExperimentKind::Validate;
    if (o.seed || o.trials || o.workers || spec.kind == senserf::ExperimentKind::Validate) {
      if (!spec.mc) spec.mc = senserf::McConfig{};
      if (o.seed) spec.mc->seed = *o.seed;
      if (o.trials) spec.mc->trials = *o.trials;
      if (o.workers) spec.mc->workers = *o.workers;
    }
    if (!o.out.empty()) spec.output = o.out;
  } catch (const senserf::Error& e) {
    std::cerr << "sense-rf: config error: " << e.what() << '\n';
    return kExitConfig;
  }

  senserf::RunResult res;
  try {
    res = senserf::run_experiment(spec);
  } catch (const senserf::ConvergenceError& e) {
    std::cerr << "sense-rf: error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const senserf::Error& e) {
    // Invalid or infeasible parameters reported by the library.
    std::cerr << "sense-rf: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "sense-rf: error: " << e.what() << '\n';
    return kExitRuntime;
  }

  if (spec.output.empty() || spec.output == "-") {
    std::cout << res.csv;
  } else {
    std::ofstream out(spec.output, std::ios::binary);
    if (!(out << res.csv)) {
      std::cerr << "sense-rf: cannot write '" << spec.output << "'\n";
      return kExitRuntime;
    }
  }
  if (spec.kind == senserf::ExperimentKind::Validate)
    std::cerr << "sense-rf: " << res.failures << " of " << res.points << " points outside 3 standard errors\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-detection sensing under RF impairments: analytic curves and Monte Carlo validation"};
  app.require_subcommand(1);
  Overrides run_opts, val_opts;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  add_common(run, run_opts);
  auto* val = app.add_subcommand("validate", "Compare analytic probabilities with Monte Carlo for a config");
  add_common(val, val_opts);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (run->parsed()) return execute(run_opts, false);
  return execute(val_opts, true);
}
