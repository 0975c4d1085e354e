// Ready-made scenarios: the 16-car four-level convoy in several variants,
// and a three-car chain for integrator checks.
#pragma once

#include "laneless/scenario.hpp"

namespace laneless::presets {

// 16 cars in four levels of four (one boundary pseudo-car per level at the
// right road edge), level spacing 50, lateral slot spacing 30, started away
// from equilibrium.
Scenario steady_flow_16();

// Same convoy started near the equilibrium of a mixed template (level 3
// compressed to 15-unit slots), with a template swap at t = 2500 that
// compresses levels 2 and 4 instead.
Scenario formation_change_16();

// Slow convoy (v0 = 1) meeting a stationary obstacle placed just behind
// level 2, in the lane of car 12.
Scenario obstacle_16();

// Car 6 driven laterally across the formation between t = 1000 and 1400;
// the remaining cars of its level re-space afterwards.
Scenario lane_change_16();

// Phantom leader plus two cars in single file.
Scenario chain_3();

}  // namespace laneless::presets
