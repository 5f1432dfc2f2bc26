#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "wendy/grid.hpp"
#include "wendy/integration_error.hpp"
#include "wendy/ode_system.hpp"

namespace wendy {

/// One experiment description shared by all CLI subcommands. Trial t uses
/// seed base_seed + t, so a config file plus seed reproduces every result.
struct ExperimentConfig {
  std::string system = "logistic";
  std::filesystem::path system_file;  // optional JSON system definition
  std::filesystem::path input_csv;    // optional measured data (select/estimate)
  int steps = 500;
  std::vector<double> noise_ratios = {0.2};
  int trials = 25;
  std::vector<std::string> estimators = {"ols", "irls"};
  std::vector<std::string> constructions = {"sl"};
  int order = 16;            // polynomial order p
  double shape = 9.0;        // bump sharpness eta (MG)
  double coarsening = 2.0;   // MG coarsening factor s
  int truncation = 1;        // Euler-Maclaurin order S; 0 = choose per dataset
  int stride = 1;
  int max_test_functions = 0;  // 0 = no cap; else stride is raised to fit
  std::uint64_t base_seed = 1;
  std::filesystem::path out_dir = ".";
  int threads = 0;  // 0 = hardware concurrency
  int radius_count = 24;
  std::vector<int> radius_steps;  // explicit sweep; overrides radius_count
  std::string noise_convention = "rms";
  double rtol = 1e-12;
  double atol = 1e-12;

  OdeSystem resolve_system() const;
  NoiseConvention convention() const;
  EulerMaclaurinConfig em_config(const Trajectory& data) const;
  std::vector<int> sweep_radii(int grid_steps) const;
  void validate() const;
};

/// Dispatches fn(0..count-1) over a worker pool; results must be written to
/// preallocated slots so output order never depends on the schedule.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

double median(std::vector<double> values);

void run_simulate(const ExperimentConfig& cfg);
void run_select(const ExperimentConfig& cfg);
void run_estimate(const ExperimentConfig& cfg);
void run_sweep_radius(const ExperimentConfig& cfg);
void run_error_curves(const ExperimentConfig& cfg);
void run_compare(const ExperimentConfig& cfg);

}  // namespace wendy
