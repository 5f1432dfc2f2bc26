#include <stdexcept>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "wendy/ode_system.hpp"

namespace wendy {

namespace {

using State = std::vector<double>;

struct Rhs {
  const OdeSystem* system;
  const Eigen::VectorXd* weights;

  void operator()(const State& u, State& dudt, double /*t*/) const {
    const Eigen::RowVectorXd row =
        Eigen::Map<const Eigen::RowVectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
    const Eigen::RowVectorXd f = system->rhs(row, *weights);
    for (std::size_t i = 0; i < dudt.size(); ++i) dudt[i] = f[static_cast<Eigen::Index>(i)];
  }
};

}  // namespace

Trajectory simulate(const OdeSystem& system, const Eigen::VectorXd& u0,
                    const TimeGrid& grid, double rtol, double atol) {
  system.validate();
  if (u0.size() != system.dimension) {
    throw std::invalid_argument("simulate: initial state dimension mismatch");
  }
  if (!(rtol > 0.0) || rtol > 1e-3 || !(atol > 0.0) || atol > 1e-3) {
    throw std::invalid_argument("simulate: tolerances must lie in (0, 1e-3]");
  }
  if (grid.steps < 1 || !(grid.span > 0.0)) {
    throw std::invalid_argument("simulate: bad grid");
  }

  namespace odeint = boost::numeric::odeint;

  Trajectory traj;
  traj.grid = grid;
  traj.values.resize(grid.num_points(), system.dimension);

  std::vector<double> times(grid.num_points());
  for (int m = 0; m <= grid.steps; ++m) times[m] = grid.point(m);

  State state(u0.data(), u0.data() + u0.size());
  Rhs rhs{&system, &system.true_weights};

  int next_row = 0;
  auto observer = [&](const State& u, double /*t*/) {
    for (int i = 0; i < system.dimension; ++i) traj.values(next_row, i) = u[i];
    ++next_row;
  };

  // Capping steps at the grid spacing keeps the dense-output interpolation
  // error at the same order as the local truncation error.
  auto stepper = odeint::make_dense_output(atol, rtol, grid.dt(),
                                           odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, rhs, state, times.begin(), times.end(),
                            grid.dt() / 10.0, observer);
  } catch (const std::exception& e) {
    const double failed_at = next_row > 0 ? times[next_row - 1] : 0.0;
    throw std::runtime_error("simulate: integration failed after t = " +
                             std::to_string(failed_at) + " (" + e.what() + ")");
  }
  if (next_row != grid.num_points()) {
    throw std::runtime_error("simulate: integration stopped early at t = " +
                             std::to_string(times[next_row]));
  }
  if (!traj.values.allFinite()) {
    throw std::runtime_error("simulate: trajectory has non-finite values");
  }
  return traj;
}

}  // namespace wendy
