#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>

namespace wendy {

/// Uniform temporal grid on [0, span] with `steps` intervals. Points are
/// generated as m * dt rather than by accumulation, so t_0 = 0 and
/// t_M = span hold exactly and the grid is bit-reproducible across runs.
struct TimeGrid {
  double span = 0.0;  // total time covered by the grid
  int steps = 0;      // number of intervals

  double dt() const { return span / steps; }
  int num_points() const { return steps + 1; }
  double point(int m) const { return m * dt(); }
  Eigen::VectorXd points() const;
};

/// Rejects non-positive spans and grids too coarse for a radius sweep
/// (the sweep needs radii from 2 dt up to floor(M/2) dt).
TimeGrid make_grid(double span, int steps);

/// State samples on a grid. Rows are time points, columns are state
/// dimensions.
struct Trajectory {
  TimeGrid grid;
  Eigen::MatrixXd values;  // (M+1) x d

  int dimension() const { return static_cast<int>(values.cols()); }
};

enum class NoiseConvention { Rms, Frobenius };

/// Additive i.i.d. Gaussian noise. Under the Rms convention (default) the
/// per-sample standard deviation is ratio * ||U||_F / sqrt((M+1) d), i.e.
/// ratio is relative to the root-mean-square signal level; Frobenius uses
/// sigma = ratio * ||U||_F directly.
struct NoiseSpec {
  double ratio = 0.0;
  std::uint64_t seed = 0;
  NoiseConvention convention = NoiseConvention::Rms;
};

/// Pure in (clean, spec): the same seed reproduces the output bit for bit.
/// One sigma is shared across all state dimensions.
Trajectory add_noise(const Trajectory& clean, const NoiseSpec& spec);

/// Relative coefficient error ||w_hat - w_star||_2 / ||w_star||_2.
double relative_l2_error(const Eigen::VectorXd& w_hat,
                         const Eigen::VectorXd& w_star);

/// CSV with header t,u1,...,ud and one row per grid point, written with 17
/// significant digits so round trips are lossless.
void write_trajectory_csv(const Trajectory& traj,
                          const std::filesystem::path& path);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace wendy
