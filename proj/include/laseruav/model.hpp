#pragma once

#include <Eigen/Core>

#include "laseruav/config.hpp"
#include "laseruav/trajectory.hpp"

namespace laseruav {

// ---------------------------------------------------------------------------
// Downlink
// ---------------------------------------------------------------------------

/// Squared UAV-to-ground-station distance ||q - mu||^2 + H^2.
double link_distance_sq(const Vec2& q, const ScenarioConfig& cfg);

/// log2(1 + p gamma / (||q - mu||^2 + H^2)), bps/Hz.
double rate_per_slot(const Vec2& q, double p, const ScenarioConfig& cfg);

/// d rate_per_slot / d q.
Vec2 rate_gradient(const Vec2& q, double p, const ScenarioConfig& cfg);

/// Sum over slots of dt * rate, bits/Hz. Throws InputError on length mismatch.
double sum_throughput(const Trajectory& traj, const PowerProfile& pw, const ScenarioConfig& cfg);

/// (1/eta) * sum p[n] dt, J.
double comm_energy(const PowerProfile& pw, const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Propulsion
// ---------------------------------------------------------------------------

/// Instantaneous propulsion power of one slot, W:
///   c1 |v|^3 + c2/|v| (1 + (|a|^2 - (a.v)^2/|v|^2) / g^2).
/// With smoothing > 0 the cubic term becomes c1 (|v|^2 + smoothing^2)^{3/2}.
double propulsion_power(const Vec2& v, const Vec2& a, const ScenarioConfig& cfg,
                        double smoothing = 0.0);

struct PropulsionGradient {
  double value = 0.0;
  Vec2 dv = Vec2::Zero();
  Vec2 da = Vec2::Zero();
};
PropulsionGradient propulsion_power_gradient(const Vec2& v, const Vec2& a,
                                             const ScenarioConfig& cfg, double smoothing = 0.0);

/// Upper-bound form that drops the (a.v)^2 reduction:
///   c1 |v|^3 + c2/|v| (1 + |a|^2 / g^2).
double propulsion_ub_power(const Vec2& v, const Vec2& a, const ScenarioConfig& cfg);

/// Steady circular flight at speed V on radius r (a perpendicular to v):
///   (c1 + c2/(g^2 r^2)) V^3 + c2 / V.
double circular_flight_power(double r, double V, const ScenarioConfig& cfg);

struct PropulsionBreakdown {
  Eigen::VectorXd per_slot;  // dt * propulsion_power, J
  double integral = 0.0;     // sum of per_slot, J
  double kinetic_delta = 0.0;  // m/2 (|v[N]|^2 - |v[1]|^2), J
  double total() const { return integral + kinetic_delta; }
};

/// Exact propulsion energy. Throws DomainError naming the first slot whose
/// speed is below V_min.
PropulsionBreakdown propulsion_energy(const Trajectory& traj, const ScenarioConfig& cfg);

/// P_ub: the same sum built from propulsion_ub_power, plus the kinetic delta.
double propulsion_ub_energy(const Trajectory& traj, const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Laser harvesting
// ---------------------------------------------------------------------------

/// Harvested power at slant distance d from the transmitter, W.
double harvest_power_at_distance(double d, const ScenarioConfig& cfg);

/// dt * C phi exp(-alpha d) / (D + d dtheta)^2 with d = sqrt(|q|^2 + H^2), J.
double harvest_per_slot(const Vec2& q, const ScenarioConfig& cfg);

/// d harvest_per_slot / d q.
Vec2 harvest_gradient(const Vec2& q, const ScenarioConfig& cfg);

/// Per-slot harvest as a function of zeta = d^2 with its first two derivatives.
struct HarvestZeta {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};
HarvestZeta harvest_of_zeta(double zeta, const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Energy balance
// ---------------------------------------------------------------------------

struct EnergyReport {
  Eigen::VectorXd harvest_per_slot;     // J
  Eigen::VectorXd propulsion_per_slot;  // J, excludes the kinetic delta
  double propulsion_total = 0.0;        // P_f, includes the kinetic delta
  double comm_total = 0.0;              // P_m
  double kinetic_delta = 0.0;
  double harvest_total = 0.0;
  double residual = 0.0;  // (P_m + P_f) - harvest_total

  bool feasible(double rel_tol = 0.0) const { return residual <= rel_tol * harvest_total; }
};

/// Assembles the consumption-versus-harvest balance. Propagates DomainError.
EnergyReport energy_feasibility(const Trajectory& traj, const PowerProfile& pw,
                                const ScenarioConfig& cfg);

}  // namespace laseruav
