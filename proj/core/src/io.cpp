#include "wendy/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wendy {

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_estimation_json(const EstimationResult& result,
                           std::optional<double> e2,
                           const std::filesystem::path& path) {
  nlohmann::json j;
  j["w_hat"] = std::vector<double>(result.weights.data(),
                                   result.weights.data() + result.weights.size());
  j["method"] = result.method == Estimator::Ols ? "ols" : "irls";
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["walltime_ms"] = result.walltime_ms;
  if (e2) j["E2"] = *e2;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace wendy
