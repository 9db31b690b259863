#pragma once

#include "homotrack/topology.hpp"
#include "homotrack/trajectory.hpp"

#include <string>
#include <vector>

namespace homotrack {

/// 40 x 20 m workspace with three square-ish obstacles staggered left to right.
Environment three_obstacle_environment();

/// Constant-speed path through the waypoints, resampled to T timesteps.
Trajectory template_from_waypoints(std::string id, const Polyline& waypoints, int T = kDefaultHorizon);

/// One template per homotopy class of the three-obstacle layout, all leaving
/// from the same start point. The class that crosses no ray is optional.
std::vector<Trajectory> three_obstacle_templates(bool include_empty_class, int T = kDefaultHorizon);

} // namespace homotrack
