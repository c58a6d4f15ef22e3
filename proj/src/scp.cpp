#include "laseruav/scp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "laseruav/log.hpp"
#include "laseruav/model.hpp"
#include "laseruav/waterfill.hpp"

namespace laseruav {

const char* phase_name(Phase phase) { return phase == Phase::kPower ? "power" : "trajectory"; }

void OptimizationTrace::write_csv(std::ostream& out) const {
  out << "iteration,phase,objective,residual,rho,kkt,accepted\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g,%d\n", r.iteration,
                  phase_name(r.phase), r.objective, r.residual, r.rho, r.kkt, r.accepted ? 1 : 0);
    out << buf;
  }
}

double ub_energy_residual(const Trajectory& traj, const PowerProfile& pw,
                          const ScenarioConfig& cfg) {
  double harvest = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) harvest += harvest_per_slot(traj.pos(n), cfg);
  return comm_energy(pw, cfg) + propulsion_ub_energy(traj, cfg) - harvest;
}

namespace {

double total_harvest(const Trajectory& traj, const ScenarioConfig& cfg) {
  double harvest = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) harvest += harvest_per_slot(traj.pos(n), cfg);
  return harvest;
}

bool within_limits(const Trajectory& traj, const ScenarioConfig& cfg) {
  try {
    check_limits(traj, cfg, 1e-9);
  } catch (const InputError&) {
    return false;
  }
  return true;
}

}  // namespace

ScpResult scp_trajectory(const PowerProfile& pw, const Trajectory& init, const ScenarioConfig& cfg,
                         const ScpOptions& options, int first_iteration) {
  check_power(pw, cfg.N);
  if (init.size() != cfg.N) throw InputError("initial trajectory has the wrong number of slots");
  const double dt = cfg.dt();

  ScpResult out;
  out.traj = init;
  out.objective = sum_throughput(init, pw, cfg);
  const double slack_tol = 1e-9 * std::max(1.0, total_harvest(init, cfg));
  const double res0 = ub_energy_residual(init, pw, cfg);
  if (res0 > slack_tol) {
    std::ostringstream msg;
    msg << "infeasible start: consumption with P_ub exceeds harvest by " << res0 << " J";
    throw InfeasibleError(msg.str());
  }

  double rho = options.initial_trust;
  int small_steps = 0;
  int iteration = first_iteration;
  for (int k = 0; k < options.max_iterations && rho >= options.min_trust; ++k, ++iteration) {
    SubproblemOptions sub = options.subproblem;
    sub.trust_radius = rho;
    const auto sp = build_subproblem(ScpIterate::at(out.traj, cfg), pw, cfg, sub);

    SubproblemSolution sol;
    try {
      sol = solve(sp, options.solver);
    } catch (const SolverError& e) {
      out.trace.records.push_back({iteration, Phase::kTrajectory, out.objective,
                                   std::numeric_limits<double>::quiet_NaN(), rho,
                                   e.kkt_residual(), false});
      throw ScpFailure(e, out.trace);
    }

    // Re-roll from the accelerations so the update equations hold to
    // rounding rather than to the solver's equality tolerance.
    const Trajectory cand = rollout(sol.traj.pos(0), sol.traj.vel(0), sol.traj.a, dt);
    const double obj = sum_throughput(cand, pw, cfg);
    const double res = ub_energy_residual(cand, pw, cfg);
    const bool accept = obj > out.objective && res <= 0.0 && within_limits(cand, cfg);
    out.trace.records.push_back(
        {iteration, Phase::kTrajectory, obj, res, rho, sol.kkt_residual, accept});
    log::info("scp ", iteration, ": R=", obj, " residual=", res, " rho=", rho,
              " newton=", sol.newton_iterations, accept ? " accepted" : " rejected");

    if (accept) {
      const double rel = (obj - out.objective) / std::max(std::abs(out.objective), 1e-12);
      out.traj = cand;
      out.objective = obj;
      rho = std::min(2.0 * rho, options.max_trust);
      small_steps = rel < options.rel_improvement ? small_steps + 1 : 0;
      if (small_steps >= options.patience) break;
    } else {
      rho *= 0.5;
    }
  }
  out.final_trust = rho;
  return out;
}

JointResult alternate(const Trajectory& init, const PowerProfile& init_power,
                      const ScenarioConfig& cfg, const AlternateOptions& options) {
  JointResult out;
  out.traj = init;
  out.power = init_power;
  out.initial_objective = sum_throughput(init, init_power, cfg);
  out.objective = out.initial_objective;

  Trajectory traj = init;
  double current = -std::numeric_limits<double>::infinity();
  int iteration = 1;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    const double budget = cfg.eta * (total_harvest(traj, cfg) - propulsion_ub_energy(traj, cfg));
    const auto wf = optimal_power(traj, budget, cfg);
    const double after_power = sum_throughput(traj, wf.power, cfg);
    out.trace.records.push_back({iteration++, Phase::kPower, after_power,
                                 ub_energy_residual(traj, wf.power, cfg),
                                 std::numeric_limits<double>::quiet_NaN(), wf.kkt_residual, true});
    log::info("outer ", outer + 1, ": water filling R=", after_power);

    ScpResult scp;
    try {
      scp = scp_trajectory(wf.power, traj, cfg, options.scp, iteration);
    } catch (const ScpFailure& e) {
      OptimizationTrace merged = out.trace;
      merged.records.insert(merged.records.end(), e.trace().records.begin(),
                            e.trace().records.end());
      throw ScpFailure(e, merged);
    }
    out.trace.records.insert(out.trace.records.end(), scp.trace.records.begin(),
                             scp.trace.records.end());
    iteration += static_cast<int>(scp.trace.records.size());
    traj = scp.traj;
    out.outer_objectives.push_back(scp.objective);
    if (scp.objective > out.objective) {
      out.objective = scp.objective;
      out.traj = scp.traj;
      out.power = wf.power;
    }

    const double previous = current;
    current = scp.objective;
    if (outer > 0 &&
        current - previous < options.rel_improvement * std::max(std::abs(previous), 1e-12)) {
      break;
    }
  }
  return out;
}

JointResult alternate(const ScenarioConfig& cfg, const AlternateOptions& options) {
  const auto plan = lap_search(cfg);
  if (!(plan.p_const > 0.0)) {
    std::ostringstream msg;
    msg << "infeasible: net harvested energy <= 0 (" << plan.net_energy << " J)";
    throw InfeasibleError(msg.str());
  }
  const auto disc = discretize(plan, cfg);
  return alternate(disc.traj, disc.power, cfg, options);
}

DiscretizedPlan single_circle_baseline(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto circle = solve_harvest_circle(cfg);
  if (!(circle.net_power > 0.0)) {
    std::ostringstream msg;
    msg << "infeasible: net harvested power on the best circle is " << circle.net_power << " W";
    throw InfeasibleError(msg.str());
  }
  const double r = circle.r;
  const double V = circle.V;
  const PathFunction path = [r, V](double t) -> PathState {
    const double th = V * t / r;
    const Vec2 radial(std::cos(th), std::sin(th));
    return {r * radial, V * Vec2(-radial.y(), radial.x()), -(V * V / r) * radial};
  };
  DiscretizedPlan out;
  out.traj = sample_path(path, cfg);
  check_limits(out.traj, cfg, 1e-9);
  const auto report = energy_feasibility(out.traj, PowerProfile(cfg.N, 0.0), cfg);
  const double net = report.harvest_total - report.propulsion_total;
  if (!(net > 0.0)) {
    std::ostringstream msg;
    msg << "infeasible: single-circle net energy is " << net << " J";
    throw InfeasibleError(msg.str());
  }
  out.power = PowerProfile(cfg.N, cfg.eta * net / cfg.T);
  return out;
}

}  // namespace laseruav
