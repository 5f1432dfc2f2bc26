#include "wendy/integration_error.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wendy/fft.hpp"
#include "wendy/regression.hpp"

namespace wendy {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kValueFloor = 1e-300;

double factorial(int n) {
  double out = 1.0;
  for (int k = 2; k <= n; ++k) out *= k;
  return out;
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int j = 1; j <= k; ++j) out = out * (n - k + j) / j;
  return out;
}

/// Fornberg recursion: weights of the derivative of order m at x0 on the
/// given nodes (exact for polynomials up to degree nodes.size() - 1).
Eigen::VectorXd fornberg_weights(double x0, const Eigen::VectorXd& nodes,
                                 int m) {
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, m + 1);
  c(0, 0) = 1.0;
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        }
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      }
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.col(m);
}

int frequency_at_slot(int slot, int m) {
  return (2 * slot < m) ? slot : slot - m;
}

/// Endpoint-difference table diff[l] = D^l u(T) - D^l u(0), l = 0..2S.
std::vector<double> endpoint_differences(const Eigen::VectorXd& u,
                                         const TimeGrid& grid,
                                         const EulerMaclaurinConfig& cfg) {
  std::vector<double> diff(2 * cfg.truncation_order + 1);
  diff[0] = u[u.size() - 1] - u[0];
  for (int l = 1; l <= 2 * cfg.truncation_order; ++l) {
    const int mu = cfg.stencil_orders[l - 1];
    diff[l] = endpoint_derivative(u, grid, l, mu, GridEnd::Right) -
              endpoint_derivative(u, grid, l, mu, GridEnd::Left);
  }
  return diff;
}

std::complex<double> em_integral_at(const std::vector<double>& diff,
                                    const TimeGrid& grid, int n,
                                    const EulerMaclaurinConfig& cfg) {
  const double dt = grid.dt();
  const std::complex<double> dn(0.0, 2.0 * kPi * n / grid.span);
  const int top = 2 * cfg.truncation_order;
  std::vector<std::complex<double>> dn_pow(top + 1);
  dn_pow[0] = 1.0;
  for (int k = 1; k <= top; ++k) dn_pow[k] = dn_pow[k - 1] * dn;

  std::complex<double> total = diff[0];
  double dt_pow = 1.0;
  for (int s = 1; s <= cfg.truncation_order; ++s) {
    dt_pow *= dt * dt;
    std::complex<double> inner = 0.0;
    for (int l = 0; l <= 2 * s; ++l) {
      inner += binomial(2 * s, l) * dn_pow[2 * s - l] * diff[l];
    }
    total += dt_pow * bernoulli_even(s) / factorial(2 * s) * inner;
  }
  return total;
}

/// Fourier coefficients of the reference polynomial in FFT slot order.
Eigen::VectorXd psi_hat_slots(int order, int radius_steps,
                              const TimeGrid& grid) {
  const int m = grid.steps;
  const double radius = radius_steps * grid.dt();
  const int max_abs = m / 2;
  Eigen::VectorXd by_abs(max_abs + 1);
  for (int n = 0; n <= max_abs; ++n) {
    by_abs[n] = poly_fourier_coefficient(order, radius, grid.span, n);
  }
  Eigen::VectorXd slots(m);
  for (int j = 0; j < m; ++j) {
    slots[j] = by_abs[std::abs(frequency_at_slot(j, m))];
  }
  return slots;
}

Eigen::VectorXd select_real_centers(const Eigen::VectorXcd& transformed,
                                    int radius_steps, int steps) {
  // Scale the residue by the whole transform: the selected entries can sit
  // at the stagnation floor while the boundary entries stay O(1).
  const double magnitude = transformed.norm();
  const double residue = transformed.imag().norm();
  if (residue > 1e-10 * std::max(magnitude, kValueFloor)) {
    throw std::runtime_error(
        "estimate_integration_error: imaginary residue " +
        std::to_string(residue) + " exceeds 1e-10 of the vector magnitude; "
        "the estimator should be real for real data");
  }
  const int count = steps - 2 * radius_steps + 1;
  Eigen::VectorXd selected(count);
  for (int k = 0; k < count; ++k) {
    selected[k] = transformed[radius_steps + k].real();
  }
  return selected;
}

}  // namespace

EulerMaclaurinConfig EulerMaclaurinConfig::with_order(int s) {
  EulerMaclaurinConfig cfg;
  cfg.truncation_order = s;
  cfg.stencil_orders.resize(2 * s);
  for (int l = 1; l <= 2 * s; ++l) cfg.stencil_orders[l - 1] = 2 * s - l + 1;
  cfg.validate();
  return cfg;
}

void EulerMaclaurinConfig::validate() const {
  if (truncation_order < 1 || truncation_order > 4) {
    throw std::invalid_argument(
        "truncation order must lie in [1, 4]; higher orders need endpoint "
        "derivatives beyond order 8");
  }
  if (static_cast<int>(stencil_orders.size()) != 2 * truncation_order) {
    throw std::invalid_argument("need one stencil order per derivative 1..2S");
  }
  for (int mu : stencil_orders) {
    if (mu < 1) throw std::invalid_argument("stencil orders must be >= 1");
  }
}

double bernoulli_even(int s) {
  static const double table[] = {1.0 / 6.0,     -1.0 / 30.0,     1.0 / 42.0,
                                 -1.0 / 30.0,   5.0 / 66.0,      -691.0 / 2730.0,
                                 7.0 / 6.0,     -3617.0 / 510.0};
  if (s < 1 || s > 8) {
    throw std::invalid_argument("bernoulli_even: s must lie in [1, 8]");
  }
  return table[s - 1];
}

double endpoint_derivative(const Eigen::VectorXd& data, const TimeGrid& grid,
                           int derivative_order, int stencil_order,
                           GridEnd end) {
  if (derivative_order < 1) {
    throw std::invalid_argument("endpoint_derivative: derivative order must be >= 1");
  }
  if (stencil_order < 1) {
    throw std::invalid_argument("endpoint_derivative: stencil order must be >= 1");
  }
  const int points = stencil_order + derivative_order;
  if (points > static_cast<int>(data.size())) {
    throw std::invalid_argument(
        "endpoint_derivative: stencil needs " + std::to_string(points) +
        " points but only " + std::to_string(data.size()) + " are available");
  }
  const double dt = grid.dt();
  Eigen::VectorXd nodes(points);
  Eigen::VectorXd values(points);
  for (int j = 0; j < points; ++j) {
    if (end == GridEnd::Left) {
      nodes[j] = j * dt;
      values[j] = data[j];
    } else {
      nodes[j] = -j * dt;
      values[j] = data[data.size() - 1 - j];
    }
  }
  const Eigen::VectorXd weights = fornberg_weights(0.0, nodes, derivative_order);
  return weights.dot(values);
}

Eigen::VectorXcd euler_maclaurin_vector(const Eigen::VectorXd& u,
                                        const TimeGrid& grid,
                                        const EulerMaclaurinConfig& cfg) {
  cfg.validate();
  if (u.size() != grid.num_points()) {
    throw std::invalid_argument("euler_maclaurin_vector: data/grid size mismatch");
  }
  const auto diff = endpoint_differences(u, grid, cfg);
  const int m = grid.steps;
  Eigen::VectorXcd out(m);
  for (int j = 0; j < m; ++j) {
    out[j] = em_integral_at(diff, grid, frequency_at_slot(j, m), cfg);
  }
  // For even M the frequency set keeps only one member of the +-M/2 pair,
  // whose joint contribution in the full series is 2 Re(I_{M/2}) (-1)^m.
  // Realifying the unpaired slot restores that symmetry, so the transform
  // of psi_hat .* I stays real for real data.
  if (m % 2 == 0) out[m / 2] = out[m / 2].real();
  return out;
}

Eigen::VectorXd estimate_integration_error(const Eigen::VectorXcd& em_vector,
                                           const TimeGrid& grid, int order,
                                           int radius_steps) {
  const int m = grid.steps;
  if (em_vector.size() != m) {
    throw std::invalid_argument("estimate_integration_error: vector length must be M");
  }
  if (radius_steps < 2 || 2 * radius_steps > m) {
    throw std::invalid_argument(
        "estimate_integration_error: radius must satisfy 2 <= m_r <= M/2");
  }
  const Eigen::VectorXd psi_hat = psi_hat_slots(order, radius_steps, grid);
  const Eigen::VectorXcd transformed =
      fft_forward(psi_hat.cast<std::complex<double>>().cwiseProduct(em_vector)) /
      std::sqrt(grid.span);
  return select_real_centers(transformed, radius_steps, m);
}

Eigen::VectorXd estimate_integration_error(const Eigen::VectorXd& u,
                                           const TimeGrid& grid, int order,
                                           int radius_steps,
                                           const EulerMaclaurinConfig& cfg) {
  return estimate_integration_error(euler_maclaurin_vector(u, grid, cfg), grid,
                                    order, radius_steps);
}

ErrorCurve estimated_error_curve(const Trajectory& data, int order,
                                 const EulerMaclaurinConfig& cfg) {
  const TimeGrid& grid = data.grid;
  if (grid.steps < 4) {
    throw std::invalid_argument("estimated_error_curve: need at least 4 intervals");
  }
  const int d = data.dimension();
  std::vector<Eigen::VectorXcd> em(d);
  for (int i = 0; i < d; ++i) {
    em[i] = euler_maclaurin_vector(data.values.col(i), grid, cfg);
  }

  const int m_max = grid.steps / 2;
  ErrorCurve curve;
  curve.kind = ErrorCurveKind::Estimated;
  curve.radii.resize(m_max - 1);
  curve.values.resize(m_max - 1);
  for (int m = 2; m <= m_max; ++m) {
    const Eigen::VectorXd psi_hat = psi_hat_slots(order, m, grid);
    double sum_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const Eigen::VectorXcd transformed =
          fft_forward(psi_hat.cast<std::complex<double>>().cwiseProduct(em[i])) /
          std::sqrt(grid.span);
      sum_sq += select_real_centers(transformed, m, grid.steps).squaredNorm();
    }
    const int count = grid.steps - 2 * m + 1;
    curve.radius_steps.push_back(m);
    curve.counts.push_back(count);
    curve.radii[m - 2] = m * grid.dt();
    curve.values[m - 2] = std::max(std::sqrt(sum_sq / count), kValueFloor);
  }
  return curve;
}

ErrorCurve true_error_curve(const OdeSystem& system, const Trajectory& clean,
                            int order) {
  system.validate();
  if (clean.dimension() != system.dimension) {
    throw std::invalid_argument("true_error_curve: data/system dimension mismatch");
  }
  const TimeGrid& grid = clean.grid;
  const int steps = grid.steps;
  const double dt = grid.dt();
  const int d = system.dimension;

  // Precompute Theta_i w_i once; the sweep then only needs windowed dots.
  std::vector<Eigen::VectorXd> rhs_values(d);
  for (int i = 0; i < d; ++i) {
    const Eigen::MatrixXd theta = feature_matrix(system, i, clean);
    rhs_values[i] = theta * system.true_weights.segment(system.weight_offset(i),
                                                        system.num_terms(i));
  }

  const int m_max = steps / 2;
  ErrorCurve curve;
  curve.kind = ErrorCurveKind::True;
  curve.radii.resize(m_max - 1);
  curve.values.resize(m_max - 1);
  for (int m = 2; m <= m_max; ++m) {
    const auto psi = ReferenceFunction::polynomial(order, m * dt);
    std::vector<double> values(2 * m + 1), slopes(2 * m + 1);
    for (int j = -m; j <= m; ++j) {
      const auto eval = psi(j * dt);
      values[j + m] = eval.value;
      slopes[j + m] = eval.derivative;
    }
    const int count = steps - 2 * m + 1;
    double sum_sq = 0.0;
    for (int center = m; center <= steps - m; ++center) {
      for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        const double* rhs = rhs_values[i].data();
        const double* u = clean.values.col(i).data();
        for (int j = -m; j <= m; ++j) {
          acc += values[j + m] * rhs[center + j] + slopes[j + m] * u[center + j];
        }
        sum_sq += dt * dt * acc * acc;
      }
    }
    curve.radius_steps.push_back(m);
    curve.counts.push_back(count);
    curve.radii[m - 2] = m * dt;
    curve.values[m - 2] = std::max(std::sqrt(sum_sq / count), kValueFloor);
  }
  return curve;
}

ResidualDecomposition residual_decomposition(const OdeSystem& system,
                                             const Trajectory& clean,
                                             const Trajectory& noisy,
                                             const Eigen::VectorXd& w,
                                             const TestFunctionBasis& basis) {
  const WeakSystem noisy_ws = assemble_weak_system(system, noisy, basis);
  const WeakSystem clean_ws = assemble_weak_system(system, clean, basis);
  const Eigen::VectorXd& w_star = system.true_weights;
  if (w.size() != w_star.size()) {
    throw std::invalid_argument("residual_decomposition: weight length mismatch");
  }

  ResidualDecomposition out;
  out.feature_noise = (noisy_ws.gram - clean_ws.gram) * w;
  out.model_mismatch = clean_ws.gram * (w - w_star);
  out.quadrature = clean_ws.gram * w_star - clean_ws.rhs;
  out.response_noise = noisy_ws.rhs - clean_ws.rhs;
  out.total = noisy_ws.gram * w - noisy_ws.rhs;
  return out;
}

int choose_truncation_order(const Eigen::VectorXd& u, const TimeGrid& grid,
                            double tol) {
  if (!(tol > 0.0) || tol >= 1.0) {
    throw std::invalid_argument("choose_truncation_order: tol must lie in (0, 1)");
  }
  if (u.size() != grid.num_points()) {
    throw std::invalid_argument("choose_truncation_order: data/grid size mismatch");
  }
  const double jump = u[u.size() - 1] - u[0];
  if (jump == 0.0) return 1;

  // Largest frequency the data actually carries: the asymptotic series is
  // only probed where the spectrum is non-negligible.
  const int m = grid.steps;
  const Eigen::VectorXcd spectrum =
      fft_forward(u.head(m).cast<std::complex<double>>());
  const double peak = spectrum.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 1;
  int n_data = 0;
  for (int j = 0; j < m; ++j) {
    if (std::abs(spectrum[j]) >= 0.01 * peak) {
      n_data = std::max(n_data, std::abs(frequency_at_slot(j, m)));
    }
  }
  if (n_data == 0) return 1;

  const double omega = 2.0 * kPi * n_data / grid.span;
  const double dt = grid.dt();
  for (int s = 1; s <= 4; ++s) {
    const double numerator = std::pow(dt, 2 * s) *
                             std::abs(bernoulli_even(s)) / factorial(2 * s) *
                             std::pow(omega, 2 * s) * std::abs(jump);
    double denominator = std::abs(jump);
    if (s > 1) {
      const auto cfg = EulerMaclaurinConfig::with_order(s - 1);
      const auto diff = endpoint_differences(u, grid, cfg);
      denominator = std::abs(em_integral_at(diff, grid, n_data, cfg));
    }
    if (denominator > 0.0 && numerator / denominator < tol) return s;
  }
  return 4;
}

void write_error_curve_csv(const ErrorCurve& curve,
                           const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "r,K,value,kind\n";
  const char* kind =
      curve.kind == ErrorCurveKind::Estimated ? "estimated" : "true";
  char buf[40];
  for (int i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", curve.radii[i]);
    os << buf << "," << curve.counts[i] << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", curve.values[i]);
    os << buf << "," << kind << "\n";
  }
}

}  // namespace wendy
