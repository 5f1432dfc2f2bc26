#include "wendy/regression.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace wendy {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_grids_match(const TimeGrid& a, const TimeGrid& b) {
  if (a.steps != b.steps || std::abs(a.span - b.span) > 1e-12 * std::abs(b.span)) {
    throw std::invalid_argument("basis grid does not match the data grid");
  }
}

}  // namespace

WeakSystem assemble_weak_system(const OdeSystem& system, const Trajectory& data,
                                const TestFunctionBasis& basis) {
  system.validate();
  check_grids_match(basis.grid, data.grid);
  if (data.dimension() != system.dimension) {
    throw std::invalid_argument("assemble_weak_system: data/system dimension mismatch");
  }

  const int k = basis.size();
  const int d = system.dimension;
  const int total = system.total_terms();

  WeakSystem ws;
  ws.gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k) * d, total);
  ws.rhs.resize(static_cast<Eigen::Index>(k) * d);
  ws.rows_per_dim = k;
  ws.dimension = d;
  for (int i = 0; i < d; ++i) {
    const int offset = system.weight_offset(i);
    const int terms = system.num_terms(i);
    ws.column_offsets.push_back(offset);
    ws.column_counts.push_back(terms);
    ws.gram.block(static_cast<Eigen::Index>(i) * k, offset, k, terms) =
        basis.phi * feature_matrix(system, i, data);
    ws.rhs.segment(static_cast<Eigen::Index>(i) * k, k) =
        -basis.phi_dot * data.values.col(i);
  }
  return ws;
}

EstimationResult wendy_ols(const WeakSystem& ws) {
  const auto start = Clock::now();
  if (ws.gram.rows() < ws.gram.cols()) {
    throw std::invalid_argument("wendy_ols: fewer rows than unknowns");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ws.gram);
  if (qr.rank() < ws.gram.cols()) {
    for (std::size_t i = 0; i < ws.column_offsets.size(); ++i) {
      const Eigen::MatrixXd block = ws.gram.block(
          static_cast<Eigen::Index>(i) * ws.rows_per_dim, ws.column_offsets[i],
          ws.rows_per_dim, ws.column_counts[i]);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> block_qr(block);
      if (block_qr.rank() < ws.column_counts[i]) {
        throw std::runtime_error(
            "wendy_ols: rank-deficient feature block in dimension " +
            std::to_string(i + 1));
      }
    }
    throw std::runtime_error("wendy_ols: rank-deficient system");
  }

  EstimationResult result;
  result.method = Estimator::Ols;
  result.weights = qr.solve(ws.rhs);
  result.iterations = 0;
  result.converged = true;
  result.walltime_ms = ms_since(start);
  return result;
}

Eigen::MatrixXd covariance_factor(const OdeSystem& system,
                                  const Trajectory& data,
                                  const TestFunctionBasis& basis,
                                  const Eigen::VectorXd& w) {
  system.validate();
  check_grids_match(basis.grid, data.grid);
  if (w.size() != system.total_terms()) {
    throw std::invalid_argument("covariance_factor: weight length mismatch");
  }

  const int k = basis.size();
  const int d = system.dimension;
  const Eigen::Index n = data.values.rows();

  Eigen::MatrixXd factor =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k) * d, n * d);
  for (int i = 0; i < d; ++i) {
    const auto jacobian = feature_jacobian(system, i, data);
    const Eigen::VectorXd w_i =
        w.segment(system.weight_offset(i), system.num_terms(i));
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
      for (int q = 0; q < system.num_terms(i); ++q) {
        diag += w_i[q] * jacobian[q].col(j);
      }
      auto block = factor.block(static_cast<Eigen::Index>(i) * k, n * j, k, n);
      block = basis.phi * diag.asDiagonal();
      if (i == j) block += basis.phi_dot;
    }
  }
  return factor;
}

EstimationResult wendy_irls(const WeakSystem& ws, const OdeSystem& system,
                            const Trajectory& data,
                            const TestFunctionBasis& basis,
                            const IrlsConfig& cfg) {
  if (!(cfg.regularization > 0.0) || cfg.regularization > 1.0) {
    throw std::invalid_argument("wendy_irls: regularization must lie in (0, 1]");
  }
  if (!(cfg.tol > 0.0) || cfg.max_iterations < 1) {
    throw std::invalid_argument("wendy_irls: bad stopping configuration");
  }

  const auto start = Clock::now();
  EstimationResult result = wendy_ols(ws);
  result.method = Estimator::Irls;
  result.converged = false;
  if (cfg.keep_history) result.history.push_back(result.weights);

  const Eigen::Index rows = ws.gram.rows();
  Eigen::MatrixXd covariance(rows, rows);
  for (int iteration = 1; iteration <= cfg.max_iterations; ++iteration) {
    const Eigen::MatrixXd factor =
        covariance_factor(system, data, basis, result.weights);

    double alpha = cfg.regularization;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0;; ++attempt) {
      covariance = alpha * Eigen::MatrixXd::Identity(rows, rows);
      covariance.selfadjointView<Eigen::Lower>().rankUpdate(factor, 1.0 - alpha);
      llt.compute(covariance.selfadjointView<Eigen::Lower>());
      if (llt.info() == Eigen::Success) break;
      if (attempt >= 3 || alpha > 1.0) {
        throw std::runtime_error(
            "wendy_irls: covariance Cholesky failed even after inflating the "
            "regularization");
      }
      alpha *= 10.0;
    }

    const Eigen::MatrixXd whitened_gram =
        llt.matrixL().solve(ws.gram);
    const Eigen::VectorXd whitened_rhs = llt.matrixL().solve(ws.rhs);
    const Eigen::VectorXd next = whitened_gram.householderQr().solve(whitened_rhs);

    const double base = result.weights.norm();
    const double change =
        base > 0.0 ? (next - result.weights).norm() / base : (next - result.weights).norm();
    result.weights = next;
    result.iterations = iteration;
    if (cfg.keep_history) result.history.push_back(next);
    if (change <= cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.walltime_ms = ms_since(start);
  return result;
}

}  // namespace wendy
