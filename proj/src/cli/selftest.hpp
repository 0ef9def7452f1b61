#pragma once

#include "cli/experiment_config.hpp"

namespace deterra::cli {

/// Runs the built-in oracle suites (Schur-complement equivalence, gradient
/// checks, chi-squared quantiles, advantage recursion, packet conservation)
/// and prints one table row per suite. Returns 0 when everything passes,
/// 3 otherwise.
int cmd_selftest(const ExperimentConfig& cfg);

}  // namespace deterra::cli
