#include "wendy/grid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wendy/rng.hpp"

namespace wendy {

Eigen::VectorXd TimeGrid::points() const {
  Eigen::VectorXd t(num_points());
  for (int m = 0; m <= steps; ++m) t[m] = point(m);
  return t;
}

TimeGrid make_grid(double span, int steps) {
  if (!(span > 0.0) || !std::isfinite(span)) {
    throw std::invalid_argument("make_grid: span must be positive and finite");
  }
  if (steps < 4) {
    throw std::invalid_argument(
        "make_grid: need at least 4 intervals (radius sweep uses m = 2.."
        "floor(M/2))");
  }
  return TimeGrid{span, steps};
}

Trajectory add_noise(const Trajectory& clean, const NoiseSpec& spec) {
  if (!clean.values.allFinite()) {
    throw std::invalid_argument("add_noise: clean trajectory has non-finite entries");
  }
  if (spec.ratio < 0.0) {
    throw std::invalid_argument("add_noise: noise ratio must be nonnegative");
  }
  Trajectory noisy = clean;
  if (spec.ratio == 0.0) return noisy;

  const double frobenius = clean.values.norm();
  double sigma = spec.ratio * frobenius;
  if (spec.convention == NoiseConvention::Rms) {
    sigma /= std::sqrt(static_cast<double>(clean.values.size()));
  }

  Rng rng(spec.seed);
  for (Eigen::Index m = 0; m < noisy.values.rows(); ++m) {
    for (Eigen::Index i = 0; i < noisy.values.cols(); ++i) {
      noisy.values(m, i) += sigma * rng.next_gaussian();
    }
  }
  return noisy;
}

double relative_l2_error(const Eigen::VectorXd& w_hat,
                         const Eigen::VectorXd& w_star) {
  if (w_hat.size() != w_star.size()) {
    throw std::invalid_argument("relative_l2_error: length mismatch");
  }
  const double denom = w_star.norm();
  if (denom == 0.0) {
    throw std::invalid_argument("relative_l2_error: reference vector is zero");
  }
  return (w_hat - w_star).norm() / denom;
}

namespace {

void format_double(std::ostream& os, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  os << buf;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj,
                          const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "t";
  for (int i = 0; i < traj.dimension(); ++i) os << ",u" << (i + 1);
  os << "\n";
  for (int m = 0; m < traj.grid.num_points(); ++m) {
    format_double(os, traj.grid.point(m));
    for (int i = 0; i < traj.dimension(); ++i) {
      os << ",";
      format_double(os, traj.values(m, i));
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("empty trajectory file: " + path.string());
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) {
    throw std::runtime_error("trajectory file too short: " + path.string());
  }
  const std::size_t cols = rows.front().size();
  if (cols < 2) {
    throw std::runtime_error("trajectory file needs t plus one state column");
  }
  for (const auto& r : rows) {
    if (r.size() != cols) {
      throw std::runtime_error("ragged trajectory file: " + path.string());
    }
  }

  const int steps = static_cast<int>(rows.size()) - 1;
  const double span = rows.back()[0];
  TimeGrid grid = make_grid(span, steps);
  for (int m = 0; m <= steps; ++m) {
    if (std::abs(rows[m][0] - grid.point(m)) > 1e-8 * span) {
      throw std::invalid_argument("trajectory grid is not uniform: " +
                                  path.string());
    }
  }

  Trajectory traj;
  traj.grid = grid;
  traj.values.resize(steps + 1, static_cast<Eigen::Index>(cols) - 1);
  for (int m = 0; m <= steps; ++m) {
    for (std::size_t i = 1; i < cols; ++i) {
      traj.values(m, static_cast<Eigen::Index>(i) - 1) = rows[m][i];
    }
  }
  return traj;
}

}  // namespace wendy
