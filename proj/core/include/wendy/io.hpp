#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "wendy/regression.hpp"

namespace wendy {

std::string format_full(double x);

/// EstimationResult as JSON; E2 is included when the true weights are known.
void write_estimation_json(const EstimationResult& result,
                           std::optional<double> e2,
                           const std::filesystem::path& path);

}  // namespace wendy
