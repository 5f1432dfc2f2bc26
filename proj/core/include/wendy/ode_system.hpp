#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wendy/grid.hpp"

namespace wendy {

/// Product of state powers prod_j u_j^{e_j}. Covers every right-hand-side
/// term of the builtin systems (monomials and constants) and is what the
/// JSON system format describes; gradients are closed-form.
struct MonomialFeature {
  Eigen::VectorXi exponents;

  double value(const Eigen::RowVectorXd& u) const;
  Eigen::RowVectorXd gradient(const Eigen::RowVectorXd& u) const;
  std::string label() const;
};

/// First-order ODE with one feature library per dimension:
///   du_i/dt = sum_q w_{i,q} f_{i,q}(u).
/// Weights are stored stacked, dimension after dimension, so their count
/// matches the number of active terms rather than a dense J x d matrix.
struct OdeSystem {
  std::string name;
  int dimension = 0;
  std::vector<std::vector<MonomialFeature>> features;  // [dim][term]
  Eigen::VectorXd true_weights;
  Eigen::VectorXd initial_state;
  double default_span = 0.0;

  int num_terms(int dim) const;
  int total_terms() const;
  /// Offset of dimension `dim`'s block inside the stacked weight vector.
  int weight_offset(int dim) const;
  Eigen::RowVectorXd rhs(const Eigen::RowVectorXd& u,
                         const Eigen::VectorXd& w) const;
  void validate() const;
};

enum class BuiltinSystem { LogisticGrowth, Duffing, FitzHughNagumo, Lorenz };

OdeSystem builtin_system(BuiltinSystem which);
/// Accepts the lowercase names used by the CLI; throws with the list of
/// valid options on an unknown name.
OdeSystem builtin_system(const std::string& name);
std::vector<std::string> builtin_system_names();

/// Loads a system description (name, per-dimension exponent tuples, true
/// weights, initial state, span) from JSON; see README for the schema.
OdeSystem load_system_json(const std::filesystem::path& path);

/// Integrates du/dt = f(u) with an adaptive Dormand-Prince pair (dense
/// output, steps capped at the grid spacing) and samples exactly on the
/// grid points. Uses the system's true weights.
Trajectory simulate(const OdeSystem& system, const Eigen::VectorXd& u0,
                    const TimeGrid& grid, double rtol = 1e-12,
                    double atol = 1e-12);

/// Feature matrix for one dimension: entry (m, q) = f_{dim,q}(U_m).
/// Non-finite feature values are reported, never propagated.
Eigen::MatrixXd feature_matrix(const OdeSystem& system, int dim,
                               const Trajectory& data);

/// Gradient of the feature map for one dimension: element q is the
/// (M+1) x d matrix of d f_{dim,q} / d u_j evaluated along the data.
std::vector<Eigen::MatrixXd> feature_jacobian(const OdeSystem& system, int dim,
                                              const Trajectory& data);

}  // namespace wendy
