#pragma once

#include <vector>

#include <Eigen/Core>

#include "wendy/grid.hpp"
#include "wendy/ode_system.hpp"
#include "wendy/test_function.hpp"

namespace wendy {

/// Stacked weak-form regression system. G is block diagonal with one
/// K x J_i block Phi Theta_i per dimension (entries outside the blocks are
/// exactly zero); b stacks -Phi_dot U_i.
struct WeakSystem {
  Eigen::MatrixXd gram;  // (K d) x J_tot
  Eigen::VectorXd rhs;   // K d
  std::vector<int> column_offsets;
  std::vector<int> column_counts;
  int rows_per_dim = 0;
  int dimension = 0;
};

WeakSystem assemble_weak_system(const OdeSystem& system, const Trajectory& data,
                                const TestFunctionBasis& basis);

enum class Estimator { Ols, Irls };

struct EstimationResult {
  Eigen::VectorXd weights;
  Estimator method = Estimator::Ols;
  int iterations = 0;
  bool converged = true;
  double walltime_ms = 0.0;
  std::vector<Eigen::VectorXd> history;
};

/// Ordinary least squares w = argmin ||G w - b||, solved through a QR
/// factorization rather than the normal equations. Rank deficiency is
/// reported with the offending dimension block.
EstimationResult wendy_ols(const WeakSystem& ws);

/// First-order noise-response operator of the residual map: block (i, j) is
/// Phi diag_m(sum_q w_{i,q} df_{i,q}/du_j(U_m)) + delta_{ij} Phi_dot.
/// Columns are grouped by input dimension j (column-major data stacking).
Eigen::MatrixXd covariance_factor(const OdeSystem& system,
                                  const Trajectory& data,
                                  const TestFunctionBasis& basis,
                                  const Eigen::VectorXd& w);

struct IrlsConfig {
  double regularization = 1e-10;  // alpha in (0, 1]
  double tol = 1e-6;              // relative change stopping tolerance
  int max_iterations = 100;
  bool keep_history = false;
};

/// Covariance-corrected iteratively reweighted least squares: starting from
/// the OLS estimate, iterate C = (1-alpha) L L^T + alpha I and solve the
/// generalized least-squares step with a Cholesky whitening plus QR.
EstimationResult wendy_irls(const WeakSystem& ws, const OdeSystem& system,
                            const Trajectory& data,
                            const TestFunctionBasis& basis,
                            const IrlsConfig& cfg = {});

}  // namespace wendy
