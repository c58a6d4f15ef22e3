#pragma once

#include "laseruav/config.hpp"
#include "laseruav/trajectory.hpp"

namespace laseruav {

struct WaterfillSolution {
  PowerProfile power;
  double level = 0.0;        // water level lambda, W
  double budget_used = 0.0;  // sum p[n] dt, J
  double kkt_residual = 0.0;
};

/// Per-slot floors (||q[n] - mu||^2 + H^2) / gamma, W.
Eigen::VectorXd channel_floors(const Trajectory& traj, const ScenarioConfig& cfg);

/// Throughput-maximizing power for a fixed trajectory:
///   p[n] = max(lambda - floor[n], 0),  sum p[n] dt = budget.
/// `budget` is the radiated transmit energy, i.e. eta times the energy left
/// after propulsion. The level is found by bisection. Throws InfeasibleError
/// when budget < 0.
WaterfillSolution optimal_power(const Trajectory& traj, double budget, const ScenarioConfig& cfg);

/// Same, directly on floors; used by optimal_power and by tests.
WaterfillSolution water_fill(const Eigen::VectorXd& floors, double budget, double dt);

}  // namespace laseruav
