#pragma once

#include "output.hpp"

namespace nanotherm::cli {

/// Exit codes shared by all subcommands.
enum ExitCode : int { kSuccess = 0, kConfigFailure = 2, kNumericFailure = 3, kPartialFailure = 4 };

int cmd_emissivity(Run& run);
int cmd_power_curve(Run& run);
int cmd_simulate(Run& run);
int cmd_sweep(Run& run);
int cmd_fit_eta(Run& run);
int cmd_stability(Run& run);
int cmd_profile(Run& run);

}  // namespace nanotherm::cli
