#include "wendy/ode_system.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wendy {

namespace {

double ipow(double x, int e) {
  double out = 1.0;
  for (int k = 0; k < e; ++k) out *= x;
  return out;
}

}  // namespace

double MonomialFeature::value(const Eigen::RowVectorXd& u) const {
  double out = 1.0;
  for (Eigen::Index j = 0; j < exponents.size(); ++j) {
    out *= ipow(u[j], exponents[j]);
  }
  return out;
}

Eigen::RowVectorXd MonomialFeature::gradient(const Eigen::RowVectorXd& u) const {
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(exponents.size());
  for (Eigen::Index j = 0; j < exponents.size(); ++j) {
    const int e = exponents[j];
    if (e == 0) continue;
    double partial = e * ipow(u[j], e - 1);
    for (Eigen::Index k = 0; k < exponents.size(); ++k) {
      if (k != j) partial *= ipow(u[k], exponents[k]);
    }
    g[j] = partial;
  }
  return g;
}

std::string MonomialFeature::label() const {
  std::ostringstream os;
  bool first = true;
  for (Eigen::Index j = 0; j < exponents.size(); ++j) {
    if (exponents[j] == 0) continue;
    if (!first) os << "*";
    os << "u" << (j + 1);
    if (exponents[j] > 1) os << "^" << exponents[j];
    first = false;
  }
  if (first) os << "1";
  return os.str();
}

int OdeSystem::num_terms(int dim) const {
  return static_cast<int>(features.at(dim).size());
}

int OdeSystem::total_terms() const {
  int total = 0;
  for (const auto& lib : features) total += static_cast<int>(lib.size());
  return total;
}

int OdeSystem::weight_offset(int dim) const {
  int offset = 0;
  for (int i = 0; i < dim; ++i) offset += num_terms(i);
  return offset;
}

Eigen::RowVectorXd OdeSystem::rhs(const Eigen::RowVectorXd& u,
                                  const Eigen::VectorXd& w) const {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(dimension);
  int q = 0;
  for (int i = 0; i < dimension; ++i) {
    double acc = 0.0;
    for (const auto& f : features[i]) acc += w[q++] * f.value(u);
    out[i] = acc;
  }
  return out;
}

void OdeSystem::validate() const {
  if (dimension < 1) throw std::invalid_argument("system dimension must be >= 1");
  if (static_cast<int>(features.size()) != dimension) {
    throw std::invalid_argument("system needs one feature library per dimension");
  }
  for (int i = 0; i < dimension; ++i) {
    if (features[i].empty()) {
      throw std::invalid_argument("feature library for dimension " +
                                  std::to_string(i + 1) + " is empty");
    }
    for (const auto& f : features[i]) {
      if (f.exponents.size() != dimension) {
        throw std::invalid_argument("feature exponent tuple length mismatch");
      }
      if ((f.exponents.array() < 0).any()) {
        throw std::invalid_argument("feature exponents must be nonnegative");
      }
    }
  }
  if (true_weights.size() != total_terms()) {
    throw std::invalid_argument("weight vector length must equal the term count");
  }
  if (initial_state.size() != dimension) {
    throw std::invalid_argument("initial state length must equal the dimension");
  }
  if (!(default_span > 0.0)) {
    throw std::invalid_argument("system span must be positive");
  }
}

namespace {

MonomialFeature mono(std::initializer_list<int> exps) {
  MonomialFeature f;
  f.exponents.resize(static_cast<Eigen::Index>(exps.size()));
  Eigen::Index j = 0;
  for (int e : exps) f.exponents[j++] = e;
  return f;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index j = 0;
  for (double x : xs) v[j++] = x;
  return v;
}

}  // namespace

OdeSystem builtin_system(BuiltinSystem which) {
  OdeSystem sys;
  switch (which) {
    case BuiltinSystem::LogisticGrowth:
      sys.name = "logistic";
      sys.dimension = 1;
      sys.features = {{mono({1}), mono({2})}};
      sys.true_weights = vec({1.0, -1.0});
      sys.initial_state = vec({0.01});
      sys.default_span = 10.0;
      break;
    case BuiltinSystem::Duffing:
      sys.name = "duffing";
      sys.dimension = 2;
      sys.features = {{mono({0, 1})},
                      {mono({0, 1}), mono({1, 0}), mono({3, 0})}};
      sys.true_weights = vec({1.0, -0.2, -0.05, -1.0});
      sys.initial_state = vec({0.0, 2.0});
      sys.default_span = 20.0;
      break;
    case BuiltinSystem::FitzHughNagumo:
      sys.name = "fitzhugh_nagumo";
      sys.dimension = 2;
      sys.features = {{mono({1, 0}), mono({3, 0}), mono({0, 1})},
                      {mono({1, 0}), mono({0, 0}), mono({0, 1})}};
      sys.true_weights =
          vec({3.0, -3.0, 3.0, -1.0 / 3.0, 17.0 / 150.0, 1.0 / 15.0});
      sys.initial_state = vec({0.0, 0.1});
      sys.default_span = 25.0;
      break;
    case BuiltinSystem::Lorenz:
      sys.name = "lorenz";
      sys.dimension = 3;
      sys.features = {{mono({0, 1, 0}), mono({1, 0, 0})},
                      {mono({1, 0, 0}), mono({1, 0, 1}), mono({0, 1, 0})},
                      {mono({1, 1, 0}), mono({0, 0, 0})}};
      sys.true_weights = vec({10.0, -10.0, 28.0, -1.0, -1.0, 1.0, -8.0 / 3.0});
      sys.initial_state = vec({-8.0, 10.0, 27.0});
      sys.default_span = 10.0;
      break;
  }
  sys.validate();
  return sys;
}

std::vector<std::string> builtin_system_names() {
  return {"logistic", "duffing", "fitzhugh_nagumo", "lorenz"};
}

OdeSystem builtin_system(const std::string& name) {
  if (name == "logistic") return builtin_system(BuiltinSystem::LogisticGrowth);
  if (name == "duffing") return builtin_system(BuiltinSystem::Duffing);
  if (name == "fitzhugh_nagumo") {
    return builtin_system(BuiltinSystem::FitzHughNagumo);
  }
  if (name == "lorenz") return builtin_system(BuiltinSystem::Lorenz);
  std::string msg = "unknown system '" + name + "'; valid options:";
  for (const auto& n : builtin_system_names()) msg += " " + n;
  throw std::invalid_argument(msg);
}

OdeSystem load_system_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open system file " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("bad system file " + path.string() + ": " +
                                e.what());
  }

  OdeSystem sys;
  try {
    sys.name = j.at("name").get<std::string>();
    sys.dimension = j.at("dimension").get<int>();
    sys.default_span = j.at("span").get<double>();
    const auto u0 = j.at("initial_state").get<std::vector<double>>();
    sys.initial_state =
        Eigen::Map<const Eigen::VectorXd>(u0.data(), static_cast<Eigen::Index>(u0.size()));
    const auto w = j.at("true_weights").get<std::vector<double>>();
    sys.true_weights =
        Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    for (const auto& lib : j.at("features")) {
      std::vector<MonomialFeature> terms;
      for (const auto& exps : lib) {
        MonomialFeature f;
        const auto e = exps.get<std::vector<int>>();
        f.exponents =
            Eigen::Map<const Eigen::VectorXi>(e.data(), static_cast<Eigen::Index>(e.size()));
        terms.push_back(std::move(f));
      }
      sys.features.push_back(std::move(terms));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("bad system file " + path.string() + ": " +
                                e.what());
  }
  sys.validate();
  return sys;
}

namespace {

Eigen::MatrixXd evaluate_features(const OdeSystem& system, int dim,
                                  const Trajectory& data, bool gradient,
                                  int grad_col) {
  const auto& lib = system.features.at(dim);
  const Eigen::Index rows = data.values.rows();
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(lib.size()));
  for (Eigen::Index m = 0; m < rows; ++m) {
    const Eigen::RowVectorXd u = data.values.row(m);
    for (std::size_t q = 0; q < lib.size(); ++q) {
      const double v =
          gradient ? lib[q].gradient(u)[grad_col] : lib[q].value(u);
      if (!std::isfinite(v)) {
        throw std::runtime_error(
            "non-finite feature value: dimension " + std::to_string(dim + 1) +
            ", term " + lib[q].label() + ", row " + std::to_string(m));
      }
      out(m, static_cast<Eigen::Index>(q)) = v;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd feature_matrix(const OdeSystem& system, int dim,
                               const Trajectory& data) {
  if (dim < 0 || dim >= system.dimension) {
    throw std::invalid_argument("feature_matrix: dimension index out of range");
  }
  if (data.dimension() != system.dimension) {
    throw std::invalid_argument("feature_matrix: data/system dimension mismatch");
  }
  return evaluate_features(system, dim, data, false, 0);
}

std::vector<Eigen::MatrixXd> feature_jacobian(const OdeSystem& system, int dim,
                                              const Trajectory& data) {
  if (dim < 0 || dim >= system.dimension) {
    throw std::invalid_argument("feature_jacobian: dimension index out of range");
  }
  if (data.dimension() != system.dimension) {
    throw std::invalid_argument("feature_jacobian: data/system dimension mismatch");
  }
  const auto& lib = system.features.at(dim);
  const Eigen::Index rows = data.values.rows();
  std::vector<Eigen::MatrixXd> out(lib.size());
  for (std::size_t q = 0; q < lib.size(); ++q) {
    out[q].resize(rows, system.dimension);
  }
  for (Eigen::Index m = 0; m < rows; ++m) {
    const Eigen::RowVectorXd u = data.values.row(m);
    for (std::size_t q = 0; q < lib.size(); ++q) {
      const Eigen::RowVectorXd g = lib[q].gradient(u);
      if (!g.allFinite()) {
        throw std::runtime_error(
            "non-finite feature gradient: dimension " + std::to_string(dim + 1) +
            ", term " + lib[q].label() + ", row " + std::to_string(m));
      }
      out[q].row(m) = g;
    }
  }
  return out;
}

}  // namespace wendy
