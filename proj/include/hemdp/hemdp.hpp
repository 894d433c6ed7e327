#pragma once

// Umbrella header for the hemdp library: HVAC scheduling in PCM buildings via
// finite-horizon dynamic programming with block and macro-action abstractions.

#include "hemdp/abstract_mdp.hpp"
#include "hemdp/baseline_ctrl.hpp"
#include "hemdp/errors.hpp"
#include "hemdp/hem_mdp.hpp"
#include "hemdp/metrics.hpp"
#include "hemdp/pcm_thermal.hpp"
#include "hemdp/scenario_io.hpp"
#include "hemdp/solver_blocks.hpp"
#include "hemdp/solver_macro.hpp"
#include "hemdp/solver_vi.hpp"
#include "hemdp/trace.hpp"
