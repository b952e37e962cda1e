#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "maebound/rademacher.hpp"

namespace maebound {

struct SuiteConfig {
  std::uint64_t seed = 0;
  /// Sign patterns per Monte-Carlo estimate.
  std::size_t draws = 10'000;
  /// Sample sets per Monte-Carlo symmetrization check.
  std::size_t symmetrization_trials = 200;
};

/// Runs every check over the built-in instance zoo: known-value complexities
/// (exact and Monte-Carlo), contraction, loss domination, additivity and
/// symmetrization. Each record names its instance in params.instance.
std::vector<CheckResult> run_rademacher_suite(const SuiteConfig& config);

/// One compact JSON object per line.
std::string to_json_lines(const std::vector<CheckResult>& results);

}  // namespace maebound
