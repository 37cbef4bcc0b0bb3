#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "deltaflow/cli.hpp"

namespace deltaflow::cli {

// One unit of work for the pool. `body` fills status, residual and output;
// the runner owns id, params, timing and exception mapping.
struct Job {
  std::string id;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::function<void(CheckResult&, std::mt19937_64&)> body;
};

std::vector<Job> plan_jobs(const RunConfig& cfg);

}  // namespace deltaflow::cli
