#pragma once

#include <vector>

#include <Eigen/Core>

#include "laseruav/config.hpp"
#include "laseruav/errors.hpp"
#include "laseruav/trajectory.hpp"

namespace laseruav {

// ---------------------------------------------------------------------------
// Local bounds used to convexify the trajectory subproblem
// ---------------------------------------------------------------------------

/// First-order under-estimator of ||v||^2 around v_i:
///   ||v_i||^2 + 2 v_i.(v - v_i).
double speed_sq_lower_bound(const Vec2& v, const Vec2& v_i);

/// Tangent of the per-slot harvest P_h(zeta) at zeta_i. P_h is convex in
/// zeta, so the tangent never exceeds the true harvest.
struct HarvestTangent {
  double zeta_i = 0.0;
  double value = 0.0;  // P_h(zeta_i), J
  double slope = 0.0;  // P_h'(zeta_i), J/m^2
  double operator()(double zeta) const { return value + slope * (zeta - zeta_i); }
};
HarvestTangent linearize_harvest(double zeta_i, const ScenarioConfig& cfg);

/// Second differences of P_h on a 1000-point grid over [H^2, 4 (L^2 + H^2)];
/// true when none is negative.
bool harvest_is_convex_in_zeta(const ScenarioConfig& cfg);

/// Concave quadratic minorant of the per-slot rate sum around q_i:
///   sum_n alpha[n] - beta[n] (||q[n] - mu||^2 - ||q_i[n] - mu||^2).
/// Not weighted by dt.
struct RateLowerBound {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;  // 1/m^2
  Eigen::VectorXd dist_sq_i;  // ||q_i[n] - mu||^2
  Vec2 mu = Vec2::Zero();

  double value(const Eigen::MatrixX2d& q) const;
};
RateLowerBound rate_lower_bound(const Eigen::MatrixX2d& q_i, const Eigen::VectorXd& power,
                                const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Subproblem
// ---------------------------------------------------------------------------

/// Expansion point of one SCP step.
struct ScpIterate {
  Trajectory traj;
  Eigen::VectorXd zeta;  // ||q_i[n]||^2 + H^2
  Eigen::VectorXd tau;   // ||v_i[n]||

  static ScpIterate at(const Trajectory& traj, const ScenarioConfig& cfg);
};

struct SubproblemOptions {
  double trust_radius = 50.0;  // per-coordinate box on q - q_i, m
  double smoothing = 1e-6;     // epsilon in c1 (|v|^2 + eps^2)^{3/2}
};

/// Inequality rows attached to every slot, in evaluation order.
enum SlotConstraint : int {
  kAccelCap = 0,   // |a|^2 <= a_max^2
  kSpeedCap,       // |v|^2 <= V_max^2
  kZetaBound,      // |q|^2 + H^2 <= zeta
  kTauBound,       // tau^2 <= speed_sq_lower_bound(v, v_i)
  kTauFloor,       // tau >= V_min
  kTrustXHi,
  kTrustXLo,
  kTrustYHi,
  kTrustYLo,
  kSlotConstraints
};

/// The convexified trajectory problem at one iterate: maximize dt * R_lb
/// subject to the update equations, speed/acceleration caps, slack bounds,
/// a per-slot trust box, and the conservative energy balance
///   sum dt [c1 |v|^3 + c2/tau + c2 |a|^2 / (g^2 tau)]
///     + m/2 (|v[N]|^2 - psi_lb(v[1])) + P_m <= sum tangent_n(zeta_n).
///
/// Decision vector layout: 8 entries per slot (qx, qy, vx, vy, ax, ay, zeta, tau).
class ConvexSubproblem {
 public:
  static constexpr int kVarsPerSlot = 8;

  ConvexSubproblem(ScpIterate iterate, const PowerProfile& pw, const ScenarioConfig& cfg,
                   SubproblemOptions options = {});

  std::size_t slots() const { return cfg_.N; }
  Eigen::Index num_vars() const { return static_cast<Eigen::Index>(kVarsPerSlot * cfg_.N); }
  const ScenarioConfig& config() const { return cfg_; }
  const ScpIterate& iterate() const { return iterate_; }
  const SubproblemOptions& options() const { return options_; }
  const RateLowerBound& rate_bound() const { return rate_; }
  const std::vector<HarvestTangent>& harvest_tangents() const { return tangents_; }
  const PowerProfile& power() const { return power_; }
  double comm_energy() const { return comm_energy_; }

  Eigen::VectorXd pack(const Trajectory& traj, const Eigen::VectorXd& zeta,
                       const Eigen::VectorXd& tau) const;
  Trajectory unpack_trajectory(const Eigen::VectorXd& x) const;
  Eigen::VectorXd unpack_zeta(const Eigen::VectorXd& x) const;
  Eigen::VectorXd unpack_tau(const Eigen::VectorXd& x) const;

  /// dt * R_lb (the quantity maximized).
  double objective(const Eigen::VectorXd& x) const;

  /// Value of one slot inequality (feasible when <= 0).
  double slot_constraint(const Eigen::VectorXd& x, std::size_t slot, SlotConstraint which) const;

  /// Left side minus right side of the energy balance (feasible when <= 0).
  double energy_constraint(const Eigen::VectorXd& x) const;

  /// Largest residual of the linear equalities (update equations, plus
  /// v[1] = v[N] and q[1] pinning when configured).
  double equality_residual(const Eigen::VectorXd& x) const;

  /// The expansion point with zeta = ||q_i||^2 + H^2 and tau = ||v_i||.
  Eigen::VectorXd expansion_point() const;

 private:
  ScpIterate iterate_;
  PowerProfile power_;
  ScenarioConfig cfg_;
  SubproblemOptions options_;
  RateLowerBound rate_;
  std::vector<HarvestTangent> tangents_;
  double comm_energy_ = 0.0;
};

/// Validates the iterate and assembles the subproblem. Throws InputError
/// when the iterate breaks the trajectory invariants or the slack bounds.
ConvexSubproblem build_subproblem(const ScpIterate& iterate, const PowerProfile& pw,
                                  const ScenarioConfig& cfg, SubproblemOptions options = {});

struct SolverOptions {
  double tolerance = 1e-6;    // scaled KKT residual
  int max_newton = 200;       // Newton steps over all barrier stages
  double barrier_growth = 20.0;
};

struct SubproblemSolution {
  Trajectory traj;
  Eigen::VectorXd zeta;
  Eigen::VectorXd tau;
  Eigen::VectorXd x;
  double objective = 0.0;  // dt * R_lb at the solution
  double kkt_residual = 0.0;
  int newton_iterations = 0;
  int phase1_iterations = 0;
  std::vector<double> kkt_history;       // KKT residual at each barrier-parameter update
  std::vector<double> stage_objectives;  // objective at each barrier-parameter update
};

/// Raised when the interior-point method stalls or exhausts its Newton budget.
class SubproblemFailure : public SolverError {
 public:
  SubproblemFailure(const std::string& what, SubproblemSolution last)
      : SolverError(what, last.kkt_residual), last_(std::move(last)) {}
  const SubproblemSolution& last_iterate() const { return last_; }

 private:
  SubproblemSolution last_;
};

/// Primal-dual interior-point method with damped Newton steps on the sparse
/// KKT system. Starts from a strictly interior perturbation of the expansion
/// point, running a log-barrier phase I on the energy balance first when
/// that perturbation has no energy slack. zeta is eliminated internally (it
/// is always tight at the optimum) and returned as |q|^2 + H^2.
SubproblemSolution solve(const ConvexSubproblem& sp, const SolverOptions& options = {});

}  // namespace laseruav
