#include "wendy/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "wendy/io.hpp"
#include "wendy/regression.hpp"
#include "wendy/selection.hpp"

namespace wendy {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  return os;
}

void write_metadata(const ExperimentConfig& cfg, const std::string& command) {
  nlohmann::json j;
  j["command"] = command;
  j["system"] = cfg.system;
  j["steps"] = cfg.steps;
  j["noise_ratios"] = cfg.noise_ratios;
  j["trials"] = cfg.trials;
  j["estimators"] = cfg.estimators;
  j["constructions"] = cfg.constructions;
  j["order"] = cfg.order;
  j["shape"] = cfg.shape;
  j["coarsening"] = cfg.coarsening;
  j["truncation"] = cfg.truncation;
  j["stride"] = cfg.stride;
  j["max_test_functions"] = cfg.max_test_functions;
  j["base_seed"] = cfg.base_seed;
  j["radius_count"] = cfg.radius_count;
  j["radius_steps"] = cfg.radius_steps;
  j["noise_convention"] = cfg.noise_convention;
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["written_at"] = stamp;  // timestamps live here, never in the CSVs
  auto os = open_out(cfg.out_dir / "metadata.json");
  os << j.dump(2) << "\n";
}

/// Basis at a fixed radius, with the stride raised when a cap on the
/// test-function count is configured.
TestFunctionBasis basis_at(const TimeGrid& grid, int order, int radius_steps,
                           int stride, int max_test_functions) {
  int effective = stride;
  if (max_test_functions > 0) {
    const int raw = grid.steps - 2 * radius_steps + 1;
    effective = std::max(effective, (raw + max_test_functions - 1) / max_test_functions);
  }
  const auto psi = ReferenceFunction::polynomial(order, radius_steps * grid.dt());
  return assemble_basis(psi, admissible_centers(grid, radius_steps, effective), grid);
}

struct TimedEstimate {
  double e2 = std::numeric_limits<double>::quiet_NaN();
  double walltime_ms = 0.0;
  bool failed = false;
};

TimedEstimate estimate_at_basis(const OdeSystem& system, const Trajectory& data,
                                const TestFunctionBasis& basis,
                                const std::string& estimator) {
  TimedEstimate out;
  try {
    const auto start = Clock::now();
    const WeakSystem ws = assemble_weak_system(system, data, basis);
    const EstimationResult result =
        estimator == "irls" ? wendy_irls(ws, system, data, basis) : wendy_ols(ws);
    out.walltime_ms = ms_since(start);
    out.e2 = relative_l2_error(result.weights, system.true_weights);
  } catch (const std::exception& e) {
    out.failed = true;
    std::cerr << "estimation failed (" << estimator << "): " << e.what() << "\n";
  }
  return out;
}

}  // namespace

OdeSystem ExperimentConfig::resolve_system() const {
  if (!system_file.empty()) return load_system_json(system_file);
  return builtin_system(system);
}

NoiseConvention ExperimentConfig::convention() const {
  if (noise_convention == "rms") return NoiseConvention::Rms;
  if (noise_convention == "frobenius") return NoiseConvention::Frobenius;
  throw std::invalid_argument("noise convention must be 'rms' or 'frobenius'");
}

EulerMaclaurinConfig ExperimentConfig::em_config(const Trajectory& data) const {
  if (truncation > 0) return EulerMaclaurinConfig::with_order(truncation);
  int order = 1;
  for (int i = 0; i < data.dimension(); ++i) {
    order = std::max(order,
                     choose_truncation_order(data.values.col(i), data.grid));
  }
  return EulerMaclaurinConfig::with_order(order);
}

std::vector<int> ExperimentConfig::sweep_radii(int grid_steps) const {
  const int m_max = grid_steps / 2;
  if (!radius_steps.empty()) {
    for (int m : radius_steps) {
      if (m < 2 || m > m_max) {
        throw std::invalid_argument("radius step " + std::to_string(m) +
                                    " outside [2, M/2]");
      }
    }
    return radius_steps;
  }
  // Geometric spacing: the decay happens at small radii.
  std::set<int> radii;
  const int count = std::max(radius_count, 2);
  const double ratio = std::pow(m_max / 2.0, 1.0 / (count - 1));
  double value = 2.0;
  for (int i = 0; i < count; ++i) {
    radii.insert(std::min(m_max, static_cast<int>(std::lround(value))));
    value *= ratio;
  }
  return {radii.begin(), radii.end()};
}

void ExperimentConfig::validate() const {
  if (steps < 8) throw std::invalid_argument("steps must be >= 8");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (order < 2 || order > 40) throw std::invalid_argument("order must be in [2, 40]");
  if (truncation < 0 || truncation > 4) {
    throw std::invalid_argument("truncation must be in [0, 4] (0 = auto)");
  }
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  for (double ratio : noise_ratios) {
    if (ratio < 0.0) throw std::invalid_argument("noise ratios must be >= 0");
  }
  for (const auto& e : estimators) {
    if (e != "ols" && e != "irls") {
      throw std::invalid_argument("estimator must be 'ols' or 'irls', got " + e);
    }
  }
  for (const auto& c : constructions) {
    if (c != "sl" && c != "mg") {
      throw std::invalid_argument("construction must be 'sl' or 'mg', got " + c);
    }
  }
  convention();
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  const OdeSystem system = cfg.resolve_system();
  const TimeGrid grid = make_grid(system.default_span, cfg.steps);
  const Trajectory clean =
      simulate(system, system.initial_state, grid, cfg.rtol, cfg.atol);
  std::filesystem::create_directories(cfg.out_dir);
  write_trajectory_csv(clean, cfg.out_dir / (system.name + "_clean.csv"));
  if (!cfg.noise_ratios.empty() && cfg.noise_ratios.front() > 0.0) {
    const Trajectory noisy = add_noise(
        clean, {cfg.noise_ratios.front(), cfg.base_seed, cfg.convention()});
    write_trajectory_csv(noisy, cfg.out_dir / (system.name + "_noisy.csv"));
  }
  write_metadata(cfg, "simulate");
}

namespace {

Trajectory load_or_simulate(const ExperimentConfig& cfg, const OdeSystem& system,
                            bool add_first_noise) {
  if (!cfg.input_csv.empty()) {
    Trajectory data = read_trajectory_csv(cfg.input_csv);
    if (data.dimension() != system.dimension) {
      throw std::invalid_argument("input data dimension does not match the system");
    }
    return data;
  }
  const TimeGrid grid = make_grid(system.default_span, cfg.steps);
  Trajectory data = simulate(system, system.initial_state, grid, cfg.rtol, cfg.atol);
  if (add_first_noise && !cfg.noise_ratios.empty() && cfg.noise_ratios.front() > 0.0) {
    data = add_noise(data, {cfg.noise_ratios.front(), cfg.base_seed, cfg.convention()});
  }
  return data;
}

}  // namespace

void run_select(const ExperimentConfig& cfg) {
  cfg.validate();
  const OdeSystem system = cfg.resolve_system();
  const Trajectory data = load_or_simulate(cfg, system, true);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string construction =
      cfg.constructions.empty() ? "sl" : cfg.constructions.front();
  if (construction == "mg") {
    const MgSelection selection = mg_select(data, cfg.shape, cfg.coarsening);
    write_error_curve_csv(selection.curve, cfg.out_dir / "curve.csv");
    write_selection_json(selection, cfg.out_dir / "selection.json",
                         cfg.out_dir / "curve.csv");
  } else {
    const SlSelection selection =
        sl_select(data, cfg.order, cfg.em_config(data), cfg.stride);
    write_error_curve_csv(selection.curve, cfg.out_dir / "curve.csv");
    write_selection_json(selection, cfg.out_dir / "selection.json",
                         cfg.out_dir / "curve.csv");
  }
  write_metadata(cfg, "select");
}

void run_estimate(const ExperimentConfig& cfg) {
  cfg.validate();
  const OdeSystem system = cfg.resolve_system();
  const Trajectory data = load_or_simulate(cfg, system, true);
  std::filesystem::create_directories(cfg.out_dir);

  const std::string construction =
      cfg.constructions.empty() ? "sl" : cfg.constructions.front();
  TestFunctionBasis basis;
  if (construction == "mg") {
    basis = mg_select(data, cfg.shape, cfg.coarsening).basis;
  } else {
    basis = sl_select(data, cfg.order, cfg.em_config(data), cfg.stride).basis;
  }

  const WeakSystem ws = assemble_weak_system(system, data, basis);
  const std::string estimator =
      cfg.estimators.empty() ? "irls" : cfg.estimators.front();
  const EstimationResult result = estimator == "irls"
                                      ? wendy_irls(ws, system, data, basis)
                                      : wendy_ols(ws);
  std::optional<double> e2;
  if (system.true_weights.size() == result.weights.size()) {
    e2 = relative_l2_error(result.weights, system.true_weights);
  }
  write_estimation_json(result, e2, cfg.out_dir / "estimate.json");
  write_metadata(cfg, "estimate");
}

void run_sweep_radius(const ExperimentConfig& cfg) {
  cfg.validate();
  const OdeSystem system = cfg.resolve_system();
  const TimeGrid grid = make_grid(system.default_span, cfg.steps);
  const Trajectory clean =
      simulate(system, system.initial_state, grid, cfg.rtol, cfg.atol);
  const std::vector<int> radii = cfg.sweep_radii(grid.steps);

  struct TrialOutput {
    double critical_radius = 0.0;
    bool degenerate = false;
    // [radius][estimator]
    std::vector<std::vector<TimedEstimate>> cells;
  };

  const int noise_count = static_cast<int>(cfg.noise_ratios.size());
  std::vector<std::vector<TrialOutput>> results(
      noise_count, std::vector<TrialOutput>(cfg.trials));

  parallel_for(noise_count * cfg.trials, cfg.threads, [&](int task) {
    const int noise_idx = task / cfg.trials;
    const int trial = task % cfg.trials;
    const double ratio = cfg.noise_ratios[noise_idx];
    const Trajectory data =
        ratio > 0.0
            ? add_noise(clean, {ratio, cfg.base_seed + static_cast<std::uint64_t>(trial),
                                cfg.convention()})
            : clean;

    TrialOutput& out = results[noise_idx][trial];
    const SlSelection selection =
        sl_select(data, cfg.order, cfg.em_config(data), cfg.stride);
    out.critical_radius = selection.critical_radius;
    out.degenerate = selection.degenerate;

    out.cells.resize(radii.size());
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      const TestFunctionBasis basis = basis_at(grid, cfg.order, radii[ri],
                                               cfg.stride, cfg.max_test_functions);
      for (const auto& estimator : cfg.estimators) {
        out.cells[ri].push_back(estimate_at_basis(system, data, basis, estimator));
      }
    }
  });

  std::filesystem::create_directories(cfg.out_dir);
  auto raw = open_out(cfg.out_dir / "results.csv");
  raw << "system,method,noise,r,trial,E2,walltime_ms\n";
  for (int ni = 0; ni < noise_count; ++ni) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const TrialOutput& out = results[ni][trial];
      for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
          const TimedEstimate& cell = out.cells[ri][ei];
          raw << system.name << "," << cfg.estimators[ei] << ","
              << format_full(cfg.noise_ratios[ni]) << ","
              << format_full(radii[ri] * grid.dt()) << "," << trial << ","
              << format_full(cell.e2) << "," << format_full(cell.walltime_ms)
              << "\n";
        }
      }
    }
  }

  auto medians = open_out(cfg.out_dir / "medians.csv");
  medians << "system,method,noise,r,median_E2\n";
  for (int ni = 0; ni < noise_count; ++ni) {
    for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
      for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        std::vector<double> e2s;
        for (int trial = 0; trial < cfg.trials; ++trial) {
          e2s.push_back(results[ni][trial].cells[ri][ei].e2);
        }
        medians << system.name << "," << cfg.estimators[ei] << ","
                << format_full(cfg.noise_ratios[ni]) << ","
                << format_full(radii[ri] * grid.dt()) << ","
                << format_full(median(e2s)) << "\n";
      }
    }
  }

  auto critical = open_out(cfg.out_dir / "critical_radius.csv");
  critical << "system,noise,trial,r_hat_c,degenerate\n";
  for (int ni = 0; ni < noise_count; ++ni) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      critical << system.name << "," << format_full(cfg.noise_ratios[ni]) << ","
               << trial << "," << format_full(results[ni][trial].critical_radius)
               << "," << (results[ni][trial].degenerate ? 1 : 0) << "\n";
    }
  }
  write_metadata(cfg, "sweep-radius");
}

void run_error_curves(const ExperimentConfig& cfg) {
  cfg.validate();
  const OdeSystem system = cfg.resolve_system();
  const TimeGrid grid = make_grid(system.default_span, cfg.steps);
  const Trajectory clean =
      simulate(system, system.initial_state, grid, cfg.rtol, cfg.atol);
  std::filesystem::create_directories(cfg.out_dir);

  write_error_curve_csv(true_error_curve(system, clean, cfg.order),
                        cfg.out_dir / "true_curve.csv");

  const ErrorCurve s1 =
      estimated_error_curve(clean, cfg.order, EulerMaclaurinConfig::with_order(1));
  const ErrorCurve s2 =
      estimated_error_curve(clean, cfg.order, EulerMaclaurinConfig::with_order(2));
  write_error_curve_csv(s1, cfg.out_dir / "est_curve_s1.csv");
  write_error_curve_csv(s2, cfg.out_dir / "est_curve_s2.csv");

  // Envelope of the estimate across noisy realizations at the first ratio.
  const double ratio = cfg.noise_ratios.empty() ? 0.2 : cfg.noise_ratios.front();
  std::vector<ErrorCurve> curves(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](int trial) {
    const Trajectory noisy = add_noise(
        clean, {ratio, cfg.base_seed + static_cast<std::uint64_t>(trial),
                cfg.convention()});
    curves[trial] =
        estimated_error_curve(noisy, cfg.order, EulerMaclaurinConfig::with_order(1));
  });
  auto envelope = open_out(cfg.out_dir / "est_envelope.csv");
  envelope << "r,lo,hi\n";
  for (int i = 0; i < s1.size(); ++i) {
    double lo = curves[0].values[i], hi = curves[0].values[i];
    for (int trial = 1; trial < cfg.trials; ++trial) {
      lo = std::min(lo, curves[trial].values[i]);
      hi = std::max(hi, curves[trial].values[i]);
    }
    envelope << format_full(s1.radii[i]) << "," << format_full(lo) << ","
             << format_full(hi) << "\n";
  }

  // e(r, p) surface with the selected radius marked per order.
  const std::vector<int> orders = {4, 8, 12, 16, 20};
  auto surface = open_out(cfg.out_dir / "surface.csv");
  surface << "p,r,value\n";
  auto markers = open_out(cfg.out_dir / "surface_markers.csv");
  markers << "p,r_hat_c\n";
  for (int p : orders) {
    const ErrorCurve curve = true_error_curve(system, clean, p);
    for (int i = 0; i < curve.size(); ++i) {
      surface << p << "," << format_full(curve.radii[i]) << ","
              << format_full(curve.values[i]) << "\n";
    }
    const SlSelection selection =
        sl_select(clean, p, EulerMaclaurinConfig::with_order(1), cfg.stride);
    markers << p << "," << format_full(selection.critical_radius) << "\n";
  }
  write_metadata(cfg, "error-curves");
}

void run_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  const OdeSystem system = cfg.resolve_system();
  const TimeGrid grid = make_grid(system.default_span, cfg.steps);
  const Trajectory clean =
      simulate(system, system.initial_state, grid, cfg.rtol, cfg.atol);

  const std::vector<std::string> constructions =
      cfg.constructions.size() == 1 && cfg.constructions.front() == "sl"
          ? std::vector<std::string>{"sl", "mg"}
          : cfg.constructions;

  struct Cell {
    TimedEstimate estimate;
    double selection_ms = 0.0;
  };
  // [noise][trial][construction][estimator]
  const int noise_count = static_cast<int>(cfg.noise_ratios.size());
  std::vector<std::vector<std::vector<std::vector<Cell>>>> results(
      noise_count,
      std::vector<std::vector<std::vector<Cell>>>(
          cfg.trials, std::vector<std::vector<Cell>>(
                          constructions.size(),
                          std::vector<Cell>(cfg.estimators.size()))));

  parallel_for(noise_count * cfg.trials, cfg.threads, [&](int task) {
    const int noise_idx = task / cfg.trials;
    const int trial = task % cfg.trials;
    const double ratio = cfg.noise_ratios[noise_idx];
    const Trajectory data =
        ratio > 0.0
            ? add_noise(clean, {ratio, cfg.base_seed + static_cast<std::uint64_t>(trial),
                                cfg.convention()})
            : clean;

    for (std::size_t ci = 0; ci < constructions.size(); ++ci) {
      TestFunctionBasis basis;
      double selection_ms = 0.0;
      try {
        if (constructions[ci] == "mg") {
          MgSelection selection = mg_select(data, cfg.shape, cfg.coarsening);
          selection_ms = selection.walltime_ms;
          basis = std::move(selection.basis);
        } else {
          SlSelection selection =
              sl_select(data, cfg.order, cfg.em_config(data), cfg.stride);
          selection_ms = selection.walltime_ms;
          basis = std::move(selection.basis);
        }
      } catch (const std::exception& e) {
        std::cerr << "selection failed (" << constructions[ci]
                  << "): " << e.what() << "\n";
        for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
          results[noise_idx][trial][ci][ei].estimate.failed = true;
        }
        continue;
      }
      for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
        Cell& cell = results[noise_idx][trial][ci][ei];
        cell.selection_ms = selection_ms;
        cell.estimate = estimate_at_basis(system, data, basis, cfg.estimators[ei]);
      }
    }
  });

  std::filesystem::create_directories(cfg.out_dir);
  auto raw = open_out(cfg.out_dir / "compare.csv");
  raw << "system,construction,method,noise,M,trial,E2,walltime_ms\n";
  for (int ni = 0; ni < noise_count; ++ni) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      for (std::size_t ci = 0; ci < constructions.size(); ++ci) {
        for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
          const Cell& cell = results[ni][trial][ci][ei];
          raw << system.name << "," << constructions[ci] << ","
              << cfg.estimators[ei] << "," << format_full(cfg.noise_ratios[ni])
              << "," << cfg.steps << "," << trial << ","
              << format_full(cell.estimate.e2) << ","
              << format_full(cell.selection_ms + cell.estimate.walltime_ms)
              << "\n";
        }
      }
    }
  }

  auto medians = open_out(cfg.out_dir / "compare_medians.csv");
  medians << "system,construction,method,noise,median_E2,median_walltime_ms\n";
  for (int ni = 0; ni < noise_count; ++ni) {
    for (std::size_t ci = 0; ci < constructions.size(); ++ci) {
      for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
        std::vector<double> e2s, times;
        for (int trial = 0; trial < cfg.trials; ++trial) {
          const Cell& cell = results[ni][trial][ci][ei];
          e2s.push_back(cell.estimate.e2);
          if (!cell.estimate.failed) {
            times.push_back(cell.selection_ms + cell.estimate.walltime_ms);
          }
        }
        medians << system.name << "," << constructions[ci] << ","
                << cfg.estimators[ei] << "," << format_full(cfg.noise_ratios[ni])
                << "," << format_full(median(e2s)) << ","
                << format_full(median(times)) << "\n";
      }
    }
  }
  write_metadata(cfg, "compare");
}

}  // namespace wendy
