#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "laseruav/config.hpp"
#include "laseruav/convexsolver.hpp"
#include "laseruav/doublecircle.hpp"
#include "laseruav/errors.hpp"
#include "laseruav/trajectory.hpp"

namespace laseruav {

enum class Phase { kPower, kTrajectory };
const char* phase_name(Phase phase);

/// One step of the optimizer. For power steps rho is NaN and kkt is the
/// water-filling residual.
struct TraceRecord {
  int iteration = 0;
  Phase phase = Phase::kTrajectory;
  double objective = 0.0;  // true R_sum of the candidate, bits/Hz
  double residual = 0.0;   // comm + P_ub - harvest of the candidate, J
  double rho = 0.0;        // trust radius used, m
  double kkt = 0.0;
  bool accepted = false;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;

  /// Header `iteration,phase,objective,residual,rho,kkt,accepted`.
  void write_csv(std::ostream& out) const;
};

/// Energy balance with propulsion replaced by P_ub: comm + P_ub - harvest, J.
double ub_energy_residual(const Trajectory& traj, const PowerProfile& pw,
                          const ScenarioConfig& cfg);

struct ScpOptions {
  double initial_trust = 50.0;  // m
  double max_trust = 200.0;
  double min_trust = 0.1;
  double rel_improvement = 1e-4;
  int patience = 3;  // consecutive small accepted steps before stopping
  int max_iterations = 50;
  SubproblemOptions subproblem;
  SolverOptions solver;
};

struct ScpResult {
  Trajectory traj;
  double objective = 0.0;
  double final_trust = 0.0;
  OptimizationTrace trace;
};

/// Raised when a subproblem solve fails; carries the trace up to the failure
/// and the best trajectory accepted so far.
class ScpFailure : public SolverError {
 public:
  ScpFailure(const SolverError& cause, OptimizationTrace trace)
      : SolverError(cause.what(), cause.kkt_residual()), trace_(std::move(trace)) {}
  const OptimizationTrace& trace() const { return trace_; }

 private:
  OptimizationTrace trace_;
};

/// Trust-region SCP on the trajectory for fixed power. A candidate is
/// accepted only when the true throughput strictly improves and the P_ub
/// energy balance holds; the radius doubles (capped) on acceptance and halves
/// otherwise. `first_iteration` offsets the trace numbering. Throws
/// InfeasibleError when `init` violates the P_ub balance.
ScpResult scp_trajectory(const PowerProfile& pw, const Trajectory& init, const ScenarioConfig& cfg,
                         const ScpOptions& options = {}, int first_iteration = 1);

struct AlternateOptions {
  ScpOptions scp;
  int max_outer = 20;
  double rel_improvement = 1e-4;
};

struct JointResult {
  Trajectory traj;
  PowerProfile power;
  double objective = 0.0;
  double initial_objective = 0.0;
  std::vector<double> outer_objectives;  // incumbent after each outer iteration
  OptimizationTrace trace;
};

/// Alternates water filling (with the P_ub budget) and trajectory SCP from
/// the given start, keeping the best pair seen.
JointResult alternate(const Trajectory& init, const PowerProfile& init_power,
                      const ScenarioConfig& cfg, const AlternateOptions& options = {});

/// Same, started from the double-circle plan and its equal power.
/// Throws InfeasibleError when the plan has no positive net energy.
JointResult alternate(const ScenarioConfig& cfg, const AlternateOptions& options = {});

/// Full-horizon flight on the harvest circle with the net energy spread
/// evenly as transmit power. Throws InfeasibleError when the net energy is
/// not positive.
DiscretizedPlan single_circle_baseline(const ScenarioConfig& cfg);

}  // namespace laseruav
