#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wendy/experiment.hpp"

namespace {

void add_common_options(CLI::App* cmd, wendy::ExperimentConfig& cfg) {
  cmd->add_option("--system", cfg.system, "builtin system name")
      ->default_val(cfg.system);
  cmd->add_option("--system-file", cfg.system_file,
                  "JSON system definition (overrides --system)");
  cmd->add_option("-M,--steps", cfg.steps, "number of grid intervals")
      ->default_val(cfg.steps);
  cmd->add_option("--noise", cfg.noise_ratios, "noise ratios")
      ->expected(-1);
  cmd->add_option("--trials", cfg.trials, "Monte-Carlo trials per setting")
      ->default_val(cfg.trials);
  cmd->add_option("--estimators", cfg.estimators, "subset of {ols, irls}")
      ->expected(-1);
  cmd->add_option("--constructions", cfg.constructions, "subset of {sl, mg}")
      ->expected(-1);
  cmd->add_option("-p,--order", cfg.order, "polynomial test-function order")
      ->default_val(cfg.order);
  cmd->add_option("--eta", cfg.shape, "bump sharpness (MG)")
      ->default_val(cfg.shape);
  cmd->add_option("-s,--coarsening", cfg.coarsening, "MG coarsening factor in [2, 4]")
      ->default_val(cfg.coarsening);
  cmd->add_option("-S,--truncation", cfg.truncation,
                  "Euler-Maclaurin truncation order; 0 selects per dataset")
      ->default_val(cfg.truncation);
  cmd->add_option("--stride", cfg.stride, "test-function center stride")
      ->default_val(cfg.stride);
  cmd->add_option("--max-test-functions", cfg.max_test_functions,
                  "cap on K per radius (0 = no cap); raises the stride")
      ->default_val(cfg.max_test_functions);
  cmd->add_option("--seed", cfg.base_seed, "base seed; trial t uses seed + t")
      ->default_val(cfg.base_seed);
  cmd->add_option("-o,--out-dir", cfg.out_dir, "output directory")
      ->default_val(cfg.out_dir.string());
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = hardware)")
      ->default_val(cfg.threads);
  cmd->add_option("--radius-count", cfg.radius_count,
                  "number of radii in a sweep")
      ->default_val(cfg.radius_count);
  cmd->add_option("--radius-steps", cfg.radius_steps,
                  "explicit sweep radii in grid steps")
      ->expected(-1);
  cmd->add_option("--noise-convention", cfg.noise_convention,
                  "rms (default) or frobenius")
      ->default_val(cfg.noise_convention);
  cmd->add_option("--rtol", cfg.rtol, "simulator relative tolerance")
      ->default_val(cfg.rtol);
  cmd->add_option("--atol", cfg.atol, "simulator absolute tolerance")
      ->default_val(cfg.atol);
  cmd->add_option("--input", cfg.input_csv,
                  "trajectory CSV to use instead of simulating");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-form parameter estimation for ODEs with data-driven "
               "test-function support selection"};
  app.set_config("--config", "", "read options from a config file");
  app.require_subcommand(1);

  wendy::ExperimentConfig cfg;
  std::function<void(const wendy::ExperimentConfig&)> action;

  auto* simulate = app.add_subcommand("simulate", "write a clean trajectory CSV");
  add_common_options(simulate, cfg);
  simulate->callback([&] { action = wendy::run_simulate; });

  auto* select = app.add_subcommand(
      "select", "pick a test-function set (SL critical radius or MG)");
  add_common_options(select, cfg);
  select->callback([&] { action = wendy::run_select; });

  auto* estimate = app.add_subcommand(
      "estimate", "run one estimation with the selected test functions");
  add_common_options(estimate, cfg);
  estimate->callback([&] { action = wendy::run_estimate; });

  auto* sweep = app.add_subcommand(
      "sweep-radius", "Monte-Carlo estimation across a radius sweep");
  add_common_options(sweep, cfg);
  sweep->callback([&] { action = wendy::run_sweep_radius; });

  auto* curves = app.add_subcommand(
      "error-curves", "emit true and estimated integration-error curves");
  add_common_options(curves, cfg);
  curves->callback([&] { action = wendy::run_error_curves; });

  auto* compare = app.add_subcommand(
      "compare", "compare SL and MG constructions under OLS and IRLS");
  add_common_options(compare, cfg);
  compare->callback([&] { action = wendy::run_compare; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    action(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
