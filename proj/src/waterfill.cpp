#include "laseruav/waterfill.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "laseruav/errors.hpp"
#include "laseruav/model.hpp"

namespace laseruav {

namespace {

double allocated(const Eigen::VectorXd& floors, double level, double dt) {
  return (level - floors.array()).max(0.0).sum() * dt;
}

}  // namespace

Eigen::VectorXd channel_floors(const Trajectory& traj, const ScenarioConfig& cfg) {
  Eigen::VectorXd floors(static_cast<Eigen::Index>(traj.size()));
  for (std::size_t n = 0; n < traj.size(); ++n) {
    floors[static_cast<Eigen::Index>(n)] = link_distance_sq(traj.pos(n), cfg) / cfg.gamma;
  }
  return floors;
}

WaterfillSolution water_fill(const Eigen::VectorXd& floors, double budget, double dt) {
  if (budget < 0.0) {
    std::ostringstream msg;
    msg << "infeasible trajectory: consumption exceeds harvest by " << -budget << " J";
    throw InfeasibleError(msg.str());
  }
  if (floors.size() == 0) throw InputError("water filling needs at least one slot");

  WaterfillSolution sol;
  const double tol = 1e-9 * std::max(1.0, budget);
  double lo = floors.minCoeff();
  if (budget == 0.0) {
    sol.level = lo;
    sol.power = PowerProfile(static_cast<std::size_t>(floors.size()), 0.0);
    return sol;
  }
  double hi = floors.maxCoeff() + budget / (static_cast<double>(floors.size()) * dt);
  while (allocated(floors, hi, dt) < budget) hi *= 2.0;

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double used = allocated(floors, mid, dt);
    if (used > budget) {
      hi = mid;
    } else {
      lo = mid;
      if (budget - used <= tol) break;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }

  // The lower end never overspends.
  sol.level = lo;
  sol.power.p = (lo - floors.array()).max(0.0).matrix();
  sol.budget_used = sol.power.p.sum() * dt;

  // Stationarity of the active slots holds by construction; report dual
  // feasibility of the inactive ones and the budget mismatch.
  double worst = std::abs(sol.budget_used - budget) / std::max(1.0, budget);
  for (Eigen::Index n = 0; n < floors.size(); ++n) {
    const double p = sol.power.p[n];
    if (p > 0.0) {
      worst = std::max(worst, std::abs(floors[n] + p - sol.level) / sol.level);
    } else {
      worst = std::max(worst, std::max(0.0, sol.level - floors[n]) / sol.level);
    }
  }
  sol.kkt_residual = worst;
  return sol;
}

WaterfillSolution optimal_power(const Trajectory& traj, double budget, const ScenarioConfig& cfg) {
  return water_fill(channel_floors(traj, cfg), budget, cfg.dt());
}

}  // namespace laseruav
