#pragma once

#include <Eigen/Core>

namespace wendy {

/// Two-segment piecewise-linear changepoint: for each interior k the first
/// segment interpolates (x_0, y_0)-(x_k, y_k) and the second
/// (x_k, y_k)-(x_end, y_end); the combined relative fitting error E(k) is
/// minimized, with ties broken to the smallest k.
struct ChangepointResult {
  int index = 0;          // 0-based position in the input arrays
  double abscissa = 0.0;  // x[index]
  Eigen::VectorXd fit_errors;  // E(k); +inf at the two untested ends
};

/// Requires len >= 3 and strictly increasing x. Denominators below 1e-300
/// in magnitude are clamped before the relative residuals are formed.
ChangepointResult detect_changepoint(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y);

}  // namespace wendy
