#include "wendy/changepoint.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wendy {

namespace {

double clamped(double y) {
  constexpr double kFloor = 1e-300;
  if (std::abs(y) >= kFloor) return y;
  return y < 0.0 ? -kFloor : kFloor;
}

}  // namespace

ChangepointResult detect_changepoint(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.size());
  if (n != y.size()) {
    throw std::invalid_argument("detect_changepoint: length mismatch");
  }
  if (n < 3) {
    throw std::invalid_argument("detect_changepoint: need at least 3 points");
  }
  for (int i = 1; i < n; ++i) {
    if (!(x[i] > x[i - 1])) {
      throw std::invalid_argument("detect_changepoint: x must be strictly increasing");
    }
  }

  ChangepointResult result;
  result.fit_errors =
      Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

  double best = std::numeric_limits<double>::infinity();
  int best_k = 1;
  for (int k = 1; k < n - 1; ++k) {
    const double slope1 = (y[k] - y[0]) / (x[k] - x[0]);
    const double slope2 = (y[n - 1] - y[k]) / (x[n - 1] - x[k]);
    double sum_sq = 0.0;
    for (int m = 0; m <= k; ++m) {
      const double fit = y[0] + slope1 * (x[m] - x[0]);
      const double rel = (fit - y[m]) / clamped(y[m]);
      sum_sq += rel * rel;
    }
    for (int m = k; m < n; ++m) {
      const double fit = y[k] + slope2 * (x[m] - x[k]);
      const double rel = (fit - y[m]) / clamped(y[m]);
      sum_sq += rel * rel;
    }
    const double err = std::sqrt(sum_sq);
    result.fit_errors[k] = err;
    if (err < best) {
      best = err;
      best_k = k;
    }
  }
  result.index = best_k;
  result.abscissa = x[best_k];
  return result;
}

}  // namespace wendy
