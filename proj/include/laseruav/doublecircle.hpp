#pragma once

#include <functional>
#include <optional>

#include "laseruav/config.hpp"
#include "laseruav/trajectory.hpp"

namespace laseruav {

/// Power-minimizing speed on a circle of radius r, clamped to [V_min, V_max].
/// Throws InputError when r <= 0.
double optimal_circle_velocity(double r, const ScenarioConfig& cfg);

/// Net harvested power (W) while circling the transmitter on radius r at
/// optimal_circle_velocity(r).
double harvest_circle_objective(double r, const ScenarioConfig& cfg);

/// Bits per joule while circling the ground station on radius r with power p.
double comm_circle_efficiency(double r, double p, const ScenarioConfig& cfg);

struct HarvestCircle {
  double r = 0.0;
  double V = 0.0;
  double net_power = 0.0;  // W, may be negative
};

struct CommCircle {
  double r = 0.0;
  double V = 0.0;
  double efficiency = 0.0;
  /// Small-SNR closed-form radius evaluated at V; only defined when
  /// c1 V^4 > c2.
  std::optional<double> closed_form_r;
};

/// Radius search range [5 m, L/2]: 1 m grid, then golden-section to 1e-3 m.
HarvestCircle solve_harvest_circle(const ScenarioConfig& cfg);
CommCircle solve_comm_circle(const ScenarioConfig& cfg, double p_guess);

struct Transition {
  double length = 0.0;    // l12, m
  double accel = 0.0;     // |a12|, m/s^2
  double duration = 0.0;  // s
};

/// Internal common tangent between the harvest circle (centre origin) and
/// the communication circle (centre (L, 0)). Throws GeometryError when
/// r1 + r2 > L or when a speed change is required over a zero-length segment.
Transition transition_geometry(double r1, double r2, double V1, double V2,
                               const ScenarioConfig& cfg);

struct DoubleCirclePlan {
  double r1 = 0.0, V1 = 0.0, n1 = 0.0;
  double r2 = 0.0, V2 = 0.0, n2 = 0.0;
  double l12 = 0.0;
  double a12_mag = 0.0;
  double t_transition = 0.0;
  double p_const = 0.0;  // W

  // Evaluated on the discretized trajectory.
  double net_energy = 0.0;  // harvest - propulsion, J
  double rate_sum = 0.0;    // bits/Hz

  /// Left-hand side of the lap-time budget minus T.
  double time_budget_residual(double T) const;
};

/// Continuous-time kinematic state along a planned path.
struct PathState {
  Vec2 q;
  Vec2 v;
  Vec2 a;
};
using PathFunction = std::function<PathState(double)>;

/// Samples a smooth path at t_n = (n-1) dt. The velocities are the exact path
/// velocities, accelerations are forward differences of them, and positions
/// are rolled out from the first sample, so the update equations hold exactly.
Trajectory sample_path(const PathFunction& path, const ScenarioConfig& cfg);

/// Harvest-circle laps ending at the tangency point, the constant-acceleration
/// segment, then communication-circle laps starting at the other tangency point.
PathFunction double_circle_path(const DoubleCirclePlan& plan, const ScenarioConfig& cfg);

struct DiscretizedPlan {
  Trajectory traj;
  PowerProfile power;
};

/// Realizes a plan on the N-slot grid with p[n] = p_const. Throws
/// DomainError naming the first slot that breaks a speed/acceleration limit.
DiscretizedPlan discretize(const DoubleCirclePlan& plan, const ScenarioConfig& cfg);

/// Evaluates one (n1, n2) candidate for fixed circles: discretizes it,
/// sets p = eta (harvest - propulsion) / T clamped at 0, and fills
/// net_energy and rate_sum.
DoubleCirclePlan evaluate_laps(const HarvestCircle& harvest, const CommCircle& comm, double n1,
                               const ScenarioConfig& cfg);

/// Exhaustive n1 search (0.01-lap grid plus the endpoint n1_max) for fixed
/// circles. Throws InfeasibleError when the transition alone exceeds T.
DoubleCirclePlan lap_search(const HarvestCircle& harvest, const CommCircle& comm,
                            const ScenarioConfig& cfg);

/// Full planner: harvest circle, communication circle bootstrapped with 5 W,
/// lap search, one re-solve of the communication circle with the realized
/// power, second lap search; the better of the two plans is returned.
DoubleCirclePlan lap_search(const ScenarioConfig& cfg);

}  // namespace laseruav
