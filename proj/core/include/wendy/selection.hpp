#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "wendy/grid.hpp"
#include "wendy/integration_error.hpp"
#include "wendy/test_function.hpp"

namespace wendy {

/// Single-scale-Local construction: the critical radius is the changepoint
/// of the log estimated-error curve, and the basis is assembled there.
struct SlSelection {
  double critical_radius = 0.0;
  int critical_radius_steps = 0;
  ErrorCurve curve;
  TestFunctionBasis basis;
  /// Set when the error curve is flat (e.g. constant data); the selection
  /// then falls back to the smallest admissible radius.
  bool degenerate = false;
  double walltime_ms = 0.0;
};

SlSelection sl_select(const Trajectory& data, int order,
                      const EulerMaclaurinConfig& cfg, int stride = 1);

/// RMS single-mode integration-error estimate used by the MG minimum-radius
/// sweep: per test function and dimension,
/// -(4 pi / sqrt(T)) Im{ (phi_k U_i)^ at mode floor(M/s) }.
double mg_rms_error(const Trajectory& data, const ReferenceFunction& psi,
                    const std::vector<int>& centers, double coarsening);

/// Multi-scale-Global construction: minimum radius from the RMS error
/// changepoint, bases stacked at r_min x (1,2,4,8), orthonormalized through
/// an SVD truncated at the corner of the singular-value spectrum.
struct MgSelection {
  double min_radius = 0.0;
  int min_radius_steps = 0;
  std::vector<int> scales;  // kept multipliers, subset of {1,2,4,8}
  Eigen::VectorXd singular_values;
  int truncation_rank = 0;
  TestFunctionBasis basis;  // orthonormalized
  ErrorCurve curve;
  double walltime_ms = 0.0;
};

MgSelection mg_select(const Trajectory& data, double shape = 9.0,
                      double coarsening = 2.0);

void write_selection_json(const SlSelection& selection,
                          const std::filesystem::path& path,
                          const std::filesystem::path& curve_csv);
void write_selection_json(const MgSelection& selection,
                          const std::filesystem::path& path,
                          const std::filesystem::path& curve_csv);

}  // namespace wendy
