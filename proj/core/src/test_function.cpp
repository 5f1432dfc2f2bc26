#include "wendy/test_function.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wendy {

namespace {

constexpr double kPi = std::numbers::pi;

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

double bump_squared_integral(double shape, double radius) {
  static thread_local std::vector<double> nodes, weights;
  if (nodes.size() != 200) gauss_legendre(200, nodes, weights);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = radius * nodes[i];
    const double x = 1.0 - (t / radius) * (t / radius);
    if (x <= 0.0) continue;
    acc += weights[i] * std::exp(-2.0 * shape / x);
  }
  return acc * radius;
}

}  // namespace

double poly_l2_log_norm(double radius, int order) {
  if (order < 1) throw std::invalid_argument("polynomial order must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  // sum_{k=0}^{2p} binom(2p,k)(-1)^k/(2k+1) = int_0^1 (1-x^2)^{2p} dx
  //                                         = prod_{k=1}^{2p} 2k/(2k+1)
  double log_sum = 0.0;
  for (int k = 1; k <= 2 * order; ++k) {
    log_sum += std::log(2.0 * k / (2.0 * k + 1.0));
  }
  return 2.0 * order * std::log(radius) + 0.5 * std::log(2.0 * radius) +
         0.5 * log_sum;
}

double poly_l2_constant(double radius, int order) {
  return std::exp(-poly_l2_log_norm(radius, order));
}

ReferenceFunction ReferenceFunction::polynomial(int order, double radius) {
  if (order < 2) {
    throw std::invalid_argument("polynomial reference function needs order >= 2");
  }
  if (order > 40) {
    throw std::invalid_argument("polynomial order capped at 40");
  }
  ReferenceFunction psi;
  psi.family_ = TestFunctionFamily::PiecewisePolynomial;
  psi.order_ = order;
  psi.radius_ = radius;
  psi.normalization_ = poly_l2_constant(radius, order);
  return psi;
}

ReferenceFunction ReferenceFunction::bump(double shape, double radius) {
  if (!(shape > 0.0)) throw std::invalid_argument("bump shape must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  ReferenceFunction psi;
  psi.family_ = TestFunctionFamily::BumpCInf;
  psi.shape_ = shape;
  psi.radius_ = radius;
  psi.normalization_ = 1.0 / std::sqrt(bump_squared_integral(shape, radius));
  return psi;
}

ReferenceFunction::Eval ReferenceFunction::operator()(double t) const {
  if (std::abs(t) >= radius_) return {0.0, 0.0};
  if (family_ == TestFunctionFamily::PiecewisePolynomial) {
    const double s = radius_ * radius_ - t * t;
    const double value = normalization_ * std::pow(s, order_);
    const double derivative =
        -2.0 * order_ * normalization_ * t * std::pow(s, order_ - 1);
    return {value, derivative};
  }
  const double x = 1.0 - (t / radius_) * (t / radius_);
  const double e = std::exp(-shape_ / x);
  if (e == 0.0) return {0.0, 0.0};
  const double value = normalization_ * e;
  const double derivative =
      value * (-2.0 * shape_ * t) / (radius_ * radius_ * x * x);
  return {value, derivative};
}

double bessel_half_integer(int p, double x) {
  if (p < 0) throw std::invalid_argument("bessel_half_integer: p must be >= 0");
  if (x < 0.0) throw std::invalid_argument("bessel_half_integer: x must be >= 0");
  if (x == 0.0) return 0.0;  // sqrt(x) prefactor kills the p = 0 limit too

  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;

  double jp = 0.0;
  if (p == 0) {
    jp = j0;
  } else if (p == 1) {
    jp = j1;
  } else if (x >= p) {
    double prev = j0, curr = j1;
    for (int k = 1; k < p; ++k) {
      const double next = (2.0 * k + 1.0) / x * curr - prev;
      prev = curr;
      curr = next;
    }
    jp = curr;
  } else {
    // Miller's downward recurrence; normalize against whichever of j0, j1
    // is better conditioned (j0 vanishes at x = k pi).
    const int start = p + 24 + static_cast<int>(x);
    double upper = 0.0, lower = 1e-280;
    double stored = 0.0;
    bool have_stored = false;
    double scaled_0 = 0.0, scaled_1 = 0.0;
    for (int k = start; k >= 1; --k) {
      const double next = (2.0 * k + 1.0) / x * lower - upper;
      upper = lower;
      lower = next;
      if (k - 1 == p) {
        stored = lower;
        have_stored = true;
      }
      if (std::abs(lower) > 1e250) {
        upper /= 1e250;
        lower /= 1e250;
        if (have_stored) stored /= 1e250;
      }
      if (k - 1 == 1) scaled_1 = lower;
      if (k - 1 == 0) scaled_0 = lower;
    }
    const double scale = std::abs(scaled_0) >= std::abs(scaled_1)
                             ? j0 / scaled_0
                             : j1 / scaled_1;
    jp = stored * scale;
  }
  return std::sqrt(2.0 * x / kPi) * jp;
}

double poly_fourier_coefficient(int order, double radius, double span, long n) {
  if (order < 1 || order > 40) {
    throw std::invalid_argument("poly_fourier_coefficient: order must be in [1, 40]");
  }
  if (!(radius > 0.0) || !(span > 0.0)) {
    throw std::invalid_argument("poly_fourier_coefficient: radius and span must be positive");
  }
  const double log_c = -poly_l2_log_norm(radius, order);
  if (n < 0) n = -n;  // psi is even, so the coefficients are too

  if (n == 0) {
    // (2C/sqrt(T)) r^{2p+1} sum_j binom(p,j)(-1)^j/(2j+1), the sum again
    // collapsing to prod_{k=1}^{p} 2k/(2k+1).
    double log_sum = 0.0;
    for (int k = 1; k <= order; ++k) {
      log_sum += std::log(2.0 * k / (2.0 * k + 1.0));
    }
    return std::exp(std::log(2.0) + log_c - 0.5 * std::log(span) +
                    (2.0 * order + 1.0) * std::log(radius) + log_sum);
  }

  const double x = 2.0 * kPi * n * radius / span;
  const double bessel = bessel_half_integer(order, x);
  if (bessel == 0.0) return 0.0;
  const double log_mag = log_c - 0.5 * std::log(span) + 0.5 * std::log(kPi) +
                         (order + 0.5) * std::log(radius * span / (n * kPi)) +
                         std::lgamma(order + 1.0) + std::log(std::abs(bessel));
  const double sign = bessel > 0.0 ? 1.0 : -1.0;
  return sign * std::exp(log_mag);
}

std::vector<int> admissible_centers(const TimeGrid& grid, int radius_steps,
                                    int stride) {
  if (radius_steps < 1) {
    throw std::invalid_argument("admissible_centers: radius must be >= dt");
  }
  if (stride < 1) throw std::invalid_argument("admissible_centers: stride must be >= 1");
  if (2 * radius_steps > grid.steps) {
    throw std::invalid_argument(
        "admissible_centers: radius exceeds half the span, no admissible "
        "centers");
  }
  std::vector<int> centers;
  for (int m = radius_steps; m <= grid.steps - radius_steps; m += stride) {
    centers.push_back(m);
  }
  return centers;
}

TestFunctionBasis assemble_basis(const ReferenceFunction& psi,
                                 const std::vector<int>& centers,
                                 const TimeGrid& grid) {
  if (centers.empty()) {
    throw std::invalid_argument("assemble_basis: empty center list");
  }
  const double dt = grid.dt();
  const double steps_real = psi.radius() / dt;
  const int radius_steps = static_cast<int>(std::llround(steps_real));
  if (std::abs(steps_real - radius_steps) > 1e-9 || radius_steps < 1) {
    throw std::invalid_argument(
        "assemble_basis: radius must be an integer multiple of dt");
  }
  for (int m : centers) {
    if (m < radius_steps || m > grid.steps - radius_steps) {
      throw std::invalid_argument("assemble_basis: center " + std::to_string(m) +
                                  " not admissible for this radius");
    }
  }

  const int K = static_cast<int>(centers.size());
  const int N = grid.num_points();
  TestFunctionBasis basis;
  basis.phi = Eigen::MatrixXd::Zero(K, N);
  basis.phi_dot = Eigen::MatrixXd::Zero(K, N);
  basis.centers = centers;
  basis.radius = radius_steps * dt;
  basis.radius_steps = radius_steps;
  basis.grid = grid;

  // The window samples are identical for every translation.
  std::vector<double> values(2 * radius_steps + 1);
  std::vector<double> slopes(2 * radius_steps + 1);
  for (int j = -radius_steps; j <= radius_steps; ++j) {
    const auto eval = psi(j * dt);
    values[j + radius_steps] = eval.value;
    slopes[j + radius_steps] = eval.derivative;
  }

  for (int k = 0; k < K; ++k) {
    for (int j = -radius_steps; j <= radius_steps; ++j) {
      const int m = centers[k] + j;
      const double q = (m == 0 || m == grid.steps) ? dt / 2.0 : dt;
      basis.phi(k, m) = values[j + radius_steps] * q;
      basis.phi_dot(k, m) = slopes[j + radius_steps] * q;
    }
  }
  return basis;
}

void write_basis_csv(const TestFunctionBasis& basis,
                     const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "row,center,radius";
  for (int m = 0; m < basis.grid.num_points(); ++m) os << ",phi_t" << m;
  os << "\n";
  char buf[40];
  for (int k = 0; k < basis.size(); ++k) {
    const int center = basis.centers.empty() ? -1 : basis.centers[k];
    os << k << "," << center << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", basis.radius);
    os << buf;
    for (int m = 0; m < basis.grid.num_points(); ++m) {
      std::snprintf(buf, sizeof(buf), "%.17g", basis.phi(k, m));
      os << "," << buf;
    }
    os << "\n";
  }
}

}  // namespace wendy
