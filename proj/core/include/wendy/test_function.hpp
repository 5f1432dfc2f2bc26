#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "wendy/grid.hpp"

namespace wendy {

enum class TestFunctionFamily { PiecewisePolynomial, BumpCInf };

/// Compactly supported, even, L2-normalized reference function on
/// [-radius, radius]. Polynomial family: C (r^2 - t^2)^p. Bump family:
/// C exp(-eta / (1 - (t/r)^2)) inside the support.
class ReferenceFunction {
 public:
  static ReferenceFunction polynomial(int order, double radius);
  static ReferenceFunction bump(double shape, double radius);

  TestFunctionFamily family() const { return family_; }
  int order() const { return order_; }
  double shape() const { return shape_; }
  double radius() const { return radius_; }
  double normalization() const { return normalization_; }

  struct Eval {
    double value;
    double derivative;
  };
  Eval operator()(double t) const;

 private:
  ReferenceFunction() = default;

  TestFunctionFamily family_ = TestFunctionFamily::PiecewisePolynomial;
  int order_ = 0;
  double shape_ = 0.0;
  double radius_ = 0.0;
  double normalization_ = 0.0;
};

/// L2-normalizing constant 1/||psi||_2 of the polynomial family, with
/// ||psi||_2 = r^{2p} sqrt(2r) sqrt(sum_k binom(2p,k)(-1)^k/(2k+1)).
/// Evaluated in log space; the alternating sum is folded into the
/// equivalent product prod_k 2k/(2k+1), which cannot cancel.
double poly_l2_constant(double radius, int order);

/// log ||psi||_2 of the unnormalized polynomial reference function.
double poly_l2_log_norm(double radius, int order);

/// J_{p+1/2}(x) through spherical Bessel functions: upward recurrence from
/// j_0, j_1 when x >= p, downward (Miller) recurrence normalized at the
/// boundary when x < p.
double bessel_half_integer(int p, double x);

/// Fourier coefficient (1/sqrt(T)) int psi(t) e^{-2 pi i n t / T} dt of the
/// polynomial reference function; real-valued and even in n.
double poly_fourier_coefficient(int order, double radius, double span, long n);

/// Grid indices m with [t_m - r, t_m + r] inside [0, span], r = radius_steps
/// * dt. Throws when the radius exceeds half the span.
std::vector<int> admissible_centers(const TimeGrid& grid, int radius_steps,
                                    int stride = 1);

/// Quadrature-weighted test-function matrices: row k holds
/// psi(t_m - t_{m_k}) q_m, where q is the composite-trapezoid weight
/// (dt/2 at the ends, dt inside). Rows of phi_dot hold the derivative.
struct TestFunctionBasis {
  Eigen::MatrixXd phi;      // K x (M+1)
  Eigen::MatrixXd phi_dot;  // K x (M+1)
  std::vector<int> centers;
  double radius = 0.0;
  int radius_steps = 0;
  TimeGrid grid;
  bool orthonormalized = false;

  int size() const { return static_cast<int>(phi.rows()); }
};

TestFunctionBasis assemble_basis(const ReferenceFunction& psi,
                                 const std::vector<int>& centers,
                                 const TimeGrid& grid);

/// One row per test function; see README for the layout.
void write_basis_csv(const TestFunctionBasis& basis,
                     const std::filesystem::path& path);

}  // namespace wendy
