#include "wendy/selection.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "wendy/changepoint.hpp"

namespace wendy {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool is_flat(const Eigen::VectorXd& log_values) {
  return (log_values.maxCoeff() - log_values.minCoeff()) < 1e-12;
}

}  // namespace

SlSelection sl_select(const Trajectory& data, int order,
                      const EulerMaclaurinConfig& cfg, int stride) {
  if (data.grid.steps < 8) {
    throw std::invalid_argument("sl_select: need at least 8 intervals");
  }
  const auto start = Clock::now();

  SlSelection selection;
  selection.curve = estimated_error_curve(data, order, cfg);

  const Eigen::VectorXd log_values = selection.curve.values.array().log();
  if (selection.curve.size() < 3 || is_flat(log_values)) {
    selection.degenerate = true;
    selection.critical_radius_steps = selection.curve.radius_steps.front();
  } else {
    const auto changepoint = detect_changepoint(selection.curve.radii, log_values);
    selection.critical_radius_steps =
        selection.curve.radius_steps[changepoint.index];
  }
  selection.critical_radius = selection.critical_radius_steps * data.grid.dt();

  const auto psi =
      ReferenceFunction::polynomial(order, selection.critical_radius);
  const auto centers =
      admissible_centers(data.grid, selection.critical_radius_steps, stride);
  selection.basis = assemble_basis(psi, centers, data.grid);
  selection.walltime_ms = ms_since(start);
  return selection;
}

double mg_rms_error(const Trajectory& data, const ReferenceFunction& psi,
                    const std::vector<int>& centers, double coarsening) {
  if (coarsening < 2.0 || coarsening > 4.0) {
    throw std::invalid_argument("mg_rms_error: coarsening factor must lie in [2, 4]");
  }
  if (centers.empty()) {
    throw std::invalid_argument("mg_rms_error: empty center list");
  }
  const TimeGrid& grid = data.grid;
  const int steps = grid.steps;
  const double dt = grid.dt();
  const int mode = static_cast<int>(steps / coarsening);
  const int radius_steps = static_cast<int>(std::llround(psi.radius() / dt));

  std::vector<double> window(2 * radius_steps + 1);
  for (int j = -radius_steps; j <= radius_steps; ++j) {
    window[j + radius_steps] = psi(j * dt).value;
  }
  // e^{-2 pi i mode m / M}, tabulated once per call.
  std::vector<std::complex<double>> phase(steps + 1);
  for (int m = 0; m <= steps; ++m) {
    const double angle = -2.0 * std::numbers::pi * mode * m / steps;
    phase[m] = {std::cos(angle), std::sin(angle)};
  }

  const double root_span = std::sqrt(grid.span);
  double sum_sq = 0.0;
  for (int center : centers) {
    for (int i = 0; i < data.dimension(); ++i) {
      std::complex<double> coeff = 0.0;
      const double* u = data.values.col(i).data();
      for (int j = -radius_steps; j <= radius_steps; ++j) {
        const int m = center + j;
        coeff += window[j + radius_steps] * u[m] * phase[m];
      }
      coeff *= dt / root_span;
      const double term = -(4.0 * std::numbers::pi / root_span) * coeff.imag();
      sum_sq += term * term;
    }
  }
  return std::sqrt(sum_sq / static_cast<double>(centers.size()));
}

MgSelection mg_select(const Trajectory& data, double shape, double coarsening) {
  const TimeGrid& grid = data.grid;
  if (grid.steps < 8) {
    throw std::invalid_argument("mg_select: need at least 8 intervals");
  }
  const auto start = Clock::now();
  const double dt = grid.dt();
  const int m_max = grid.steps / 2;

  MgSelection selection;
  selection.curve.kind = ErrorCurveKind::Estimated;
  selection.curve.radii.resize(m_max - 1);
  selection.curve.values.resize(m_max - 1);
  for (int m = 2; m <= m_max; ++m) {
    const auto psi = ReferenceFunction::bump(shape, m * dt);
    const auto centers = admissible_centers(grid, m);
    const double value = mg_rms_error(data, psi, centers, coarsening);
    selection.curve.radius_steps.push_back(m);
    selection.curve.counts.push_back(static_cast<int>(centers.size()));
    selection.curve.radii[m - 2] = m * dt;
    selection.curve.values[m - 2] = std::max(value, 1e-300);
  }

  const Eigen::VectorXd log_values = selection.curve.values.array().log();
  if (selection.curve.size() < 3 || is_flat(log_values)) {
    selection.min_radius_steps = selection.curve.radius_steps.front();
  } else {
    const auto changepoint = detect_changepoint(selection.curve.radii, log_values);
    selection.min_radius_steps = selection.curve.radius_steps[changepoint.index];
  }
  selection.min_radius = selection.min_radius_steps * dt;

  if (2 * selection.min_radius_steps > grid.steps) {
    throw std::runtime_error(
        "mg_select: minimum radius admits no test functions");
  }

  int total_rows = 0;
  std::vector<TestFunctionBasis> stack;
  for (int scale : {1, 2, 4, 8}) {
    const int radius_steps = scale * selection.min_radius_steps;
    if (2 * radius_steps > grid.steps) {
      std::clog << "mg_select: dropping scale x" << scale
                << " (radius exceeds half the span)\n";
      continue;
    }
    const auto psi = ReferenceFunction::bump(shape, radius_steps * dt);
    stack.push_back(assemble_basis(psi, admissible_centers(grid, radius_steps), grid));
    selection.scales.push_back(scale);
    total_rows += stack.back().size();
  }

  const int n = grid.num_points();
  Eigen::MatrixXd phi_full(total_rows, n);
  Eigen::MatrixXd phi_dot_full(total_rows, n);
  int row = 0;
  for (const auto& basis : stack) {
    phi_full.middleRows(row, basis.size()) = basis.phi;
    phi_dot_full.middleRows(row, basis.size()) = basis.phi_dot;
    row += basis.size();
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(phi_full,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  selection.singular_values = svd.singularValues();

  const Eigen::VectorXd& sigma = selection.singular_values;
  const int effective_rank = [&] {
    int rank = 0;
    const double floor = 1e-12 * sigma[0];
    while (rank < sigma.size() && sigma[rank] > floor) ++rank;
    return std::max(rank, 1);
  }();

  Eigen::VectorXd log_sigma(effective_rank);
  for (int i = 0; i < effective_rank; ++i) {
    log_sigma[i] = std::log(std::max(sigma[i], 1e-300));
  }
  int rank = effective_rank;
  if (effective_rank >= 3 && !is_flat(log_sigma)) {
    Eigen::VectorXd index_axis(effective_rank);
    for (int i = 0; i < effective_rank; ++i) index_axis[i] = i + 1;
    rank = detect_changepoint(index_axis, log_sigma).index + 1;
  }
  selection.truncation_rank = rank;

  const Eigen::MatrixXd projector =
      sigma.head(rank).cwiseInverse().asDiagonal() *
      svd.matrixU().leftCols(rank).transpose();

  selection.basis.phi = projector * phi_full;
  selection.basis.phi_dot = projector * phi_dot_full;
  selection.basis.radius = selection.min_radius;
  selection.basis.radius_steps = selection.min_radius_steps;
  selection.basis.grid = grid;
  selection.basis.orthonormalized = true;
  selection.walltime_ms = ms_since(start);
  return selection;
}

void write_selection_json(const SlSelection& selection,
                          const std::filesystem::path& path,
                          const std::filesystem::path& curve_csv) {
  nlohmann::json j;
  j["method"] = "sl";
  j["r_hat_c"] = selection.critical_radius;
  j["r_hat_c_steps"] = selection.critical_radius_steps;
  j["K"] = selection.basis.size();
  j["degenerate"] = selection.degenerate;
  j["walltime_ms"] = selection.walltime_ms;
  j["curve_csv_path"] = curve_csv.string();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << j.dump(2) << "\n";
}

void write_selection_json(const MgSelection& selection,
                          const std::filesystem::path& path,
                          const std::filesystem::path& curve_csv) {
  nlohmann::json j;
  j["method"] = "mg";
  j["r_min"] = selection.min_radius;
  j["r_min_steps"] = selection.min_radius_steps;
  j["scales"] = selection.scales;
  j["K"] = selection.basis.size();
  j["truncation_rank"] = selection.truncation_rank;
  j["walltime_ms"] = selection.walltime_ms;
  j["curve_csv_path"] = curve_csv.string();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace wendy
