#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "wendy/grid.hpp"
#include "wendy/ode_system.hpp"
#include "wendy/test_function.hpp"

namespace wendy {

/// Truncation settings for the Euler-Maclaurin boundary expansion.
/// stencil_orders[l-1] is the one-sided finite-difference order used for
/// the l-th endpoint derivative; the default balance rule is
/// mu_l = 2S - l + 1. Orders above S = 4 would need endpoint derivatives
/// beyond order 8 from noisy data and are refused.
struct EulerMaclaurinConfig {
  int truncation_order = 1;
  std::vector<int> stencil_orders = {2, 1};

  static EulerMaclaurinConfig with_order(int s);
  void validate() const;
};

/// Exact even-index Bernoulli numbers B_{2s}, s = 1..8.
double bernoulli_even(int s);

enum class GridEnd { Left, Right };

/// One-sided finite-difference endpoint derivative of the given order,
/// using exactly stencil_order + derivative_order boundary points; the
/// weights come from the Fornberg recursion.
double endpoint_derivative(const Eigen::VectorXd& data, const TimeGrid& grid,
                           int derivative_order, int stencil_order,
                           GridEnd end);

/// Per-frequency Euler-Maclaurin approximations I_n of the weak-form
/// boundary integrals, stored in FFT slot order (slot j holds frequency j
/// for 2j < M, else j - M). Independent of the test-function radius, so
/// callers compute it once per data column and reuse it across a sweep.
Eigen::VectorXcd euler_maclaurin_vector(const Eigen::VectorXd& u,
                                        const TimeGrid& grid,
                                        const EulerMaclaurinConfig& cfg);

/// Estimated integration error at every stride-1 admissible center:
/// (1/sqrt(T)) P F Psi_hat I, evaluated via the FFT. The result is provably
/// real; an imaginary residue above 1e-10 of the vector magnitude raises an
/// internal-consistency error.
Eigen::VectorXd estimate_integration_error(const Eigen::VectorXcd& em_vector,
                                           const TimeGrid& grid, int order,
                                           int radius_steps);
Eigen::VectorXd estimate_integration_error(const Eigen::VectorXd& u,
                                           const TimeGrid& grid, int order,
                                           int radius_steps,
                                           const EulerMaclaurinConfig& cfg);

enum class ErrorCurveKind { Estimated, True };

/// Radius sweep r = m dt, m = 2..floor(M/2), with the per-radius error
/// norm and test-function count. Values are floored at 1e-300 so logs stay
/// finite on degenerate data.
struct ErrorCurve {
  std::vector<int> radius_steps;
  Eigen::VectorXd radii;
  Eigen::VectorXd values;
  std::vector<int> counts;
  ErrorCurveKind kind = ErrorCurveKind::Estimated;

  int size() const { return static_cast<int>(radii.size()); }
};

/// sqrt(1/K(r)) norm of the per-dimension estimated errors, concatenated
/// over data columns.
ErrorCurve estimated_error_curve(const Trajectory& data, int order,
                                 const EulerMaclaurinConfig& cfg);

/// True integration error e(r) = (1/sqrt(K)) ||G* w* - B*||_F; needs the
/// true weights and noise-free data, so this is a validation tool.
ErrorCurve true_error_curve(const OdeSystem& system, const Trajectory& clean,
                            int order);

/// The four terms of the weak-form residual split: feature-noise term
/// (G - G*) w, model mismatch G* (w - w*), quadrature error G* w* - b*, and
/// response noise b - b*. Their signed sum reproduces G w - b.
struct ResidualDecomposition {
  Eigen::VectorXd feature_noise;    // e_Theta
  Eigen::VectorXd model_mismatch;   // r_0
  Eigen::VectorXd quadrature;       // e_int
  Eigen::VectorXd response_noise;   // b^eps
  Eigen::VectorXd total;            // G w - b on the noisy data
};

ResidualDecomposition residual_decomposition(const OdeSystem& system,
                                             const Trajectory& clean,
                                             const Trajectory& noisy,
                                             const Eigen::VectorXd& w,
                                             const TestFunctionBasis& basis);

/// Smallest truncation order S whose leading omitted term is below tol
/// relative to the running sum, probed at the largest frequency the data
/// actually carries (>= 1% of the peak DFT magnitude). Capped at 4.
int choose_truncation_order(const Eigen::VectorXd& u, const TimeGrid& grid,
                            double tol = 0.1);

/// CSV with header r,K,value,kind.
void write_error_curve_csv(const ErrorCurve& curve,
                           const std::filesystem::path& path);

}  // namespace wendy
