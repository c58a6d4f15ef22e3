#include <cmath>
#include <sstream>

#include "doctest.h"
#include "laseruav/doublecircle.hpp"
#include "laseruav/errors.hpp"
#include "laseruav/model.hpp"
#include "laseruav/scp.hpp"
#include "laseruav/waterfill.hpp"

using namespace laseruav;

namespace {

PowerProfile ub_power(const Trajectory& traj, const ScenarioConfig& cfg) {
  const auto rep = energy_feasibility(traj, PowerProfile(cfg.N, 0.0), cfg);
  return optimal_power(traj, cfg.eta * (rep.harvest_total - propulsion_ub_energy(traj, cfg)), cfg).power;
}

void check_trace(const OptimizationTrace& trace) {
  double last = -1.0;
  for (const auto& r : trace.records) {
    if (!r.accepted) continue;
    CHECK(r.objective >= last - 1e-8);
    CHECK(r.residual <= 0.0);
    if (r.phase == Phase::kTrajectory) CHECK(r.kkt <= 1e-6);
    last = r.objective;
  }
}

}  // namespace

TEST_SUITE("scp") {

TEST_CASE("trajectory SCP from the double circle") {
  const auto cfg = ScenarioConfig::reference_setup();
  const auto d = discretize(lap_search(cfg), cfg);
  const auto pw = ub_power(d.traj, cfg);
  const double start = sum_throughput(d.traj, pw, cfg);
  const auto res = scp_trajectory(pw, d.traj, cfg);
  CHECK(res.objective > start);
  CHECK(res.objective == doctest::Approx(sum_throughput(res.traj, pw, cfg)).epsilon(1e-14));
  check_trace(res.trace);
  CHECK(energy_feasibility(res.traj, pw, cfg).residual <= 0.0);
  CHECK(kinematic_defect(res.traj, cfg.dt()) <= 1e-9);
  CHECK_NOTHROW(check_limits(res.traj, cfg));

  SUBCASE("deterministic") {
    const auto again = scp_trajectory(pw, d.traj, cfg);
    REQUIRE(again.trace.records.size() == res.trace.records.size());
    for (std::size_t k = 0; k < res.trace.records.size(); ++k) {
      CHECK(again.trace.records[k].objective == res.trace.records[k].objective);
    }
    CHECK(again.traj.q == res.traj.q);
  }
  SUBCASE("stable under a 1 m shift of the start") {
    const auto shifted = rollout(d.traj.pos(0) + Vec2(0.0, 1.0), d.traj.vel(0), d.traj.a, cfg.dt());
    const auto pw2 = ub_power(shifted, cfg);
    const auto res2 = scp_trajectory(pw2, shifted, cfg);
    CHECK(std::abs(res2.objective - res.objective) <= 0.01 * res.objective);
  }
}

TEST_CASE("zero power keeps the start") {
  auto cfg = ScenarioConfig::reference_setup();
  cfg.N = 80;
  cfg.T = 40.0;
  const auto d = discretize(lap_search(cfg), cfg);
  const auto res = scp_trajectory(PowerProfile(cfg.N, 0.0), d.traj, cfg);
  CHECK(res.objective == 0.0);
  CHECK(res.traj.q == d.traj.q);
  for (const auto& r : res.trace.records) CHECK_FALSE(r.accepted);
}

TEST_CASE("infeasible start and solver failure") {
  auto cfg = ScenarioConfig::reference_setup();
  cfg.N = 80;
  cfg.T = 40.0;
  const auto d = discretize(lap_search(cfg), cfg);
  CHECK_THROWS_AS(scp_trajectory(PowerProfile(cfg.N, 1e4), d.traj, cfg), InfeasibleError);

  ScpOptions opt;
  opt.solver.max_newton = 1;
  try {
    scp_trajectory(ub_power(d.traj, cfg), d.traj, cfg, opt);
    FAIL("expected ScpFailure");
  } catch (const ScpFailure& e) {
    REQUIRE(e.trace().records.size() == 1);
    CHECK_FALSE(e.trace().records[0].accepted);
  }
}

TEST_CASE("alternating optimization") {
  auto cfg = ScenarioConfig::reference_setup();
  cfg.N = 100;
  cfg.T = 50.0;
  const auto res = alternate(cfg);
  CHECK(res.objective >= res.initial_objective);
  for (std::size_t k = 1; k < res.outer_objectives.size(); ++k) {
    CHECK(res.outer_objectives[k] >= res.outer_objectives[k - 1] - 1e-8);
  }
  check_trace(res.trace);
  CHECK(res.trace.records.front().phase == Phase::kPower);
  const auto rep = energy_feasibility(res.traj, res.power, cfg);
  CHECK(rep.residual <= 1e-6 * rep.harvest_total);
  CHECK(res.objective == doctest::Approx(sum_throughput(res.traj, res.power, cfg)).epsilon(1e-14));

  std::ostringstream csv;
  res.trace.write_csv(csv);
  CHECK(csv.str().rfind("iteration,phase,objective,residual,rho,kkt,accepted\n1,power,", 0) == 0);
}

TEST_CASE("alternating optimization reports an infeasible scenario") {
  auto cfg = ScenarioConfig::reference_setup();
  cfg.phi = 0.0;
  CHECK_THROWS_AS(alternate(cfg), InfeasibleError);
  CHECK_THROWS_AS(single_circle_baseline(cfg), InfeasibleError);
}

TEST_CASE("single-circle baseline") {
  const auto cfg = ScenarioConfig::reference_setup();
  const auto base = single_circle_baseline(cfg);
  const auto circle = solve_harvest_circle(cfg);
  for (std::size_t n = 0; n < cfg.N; ++n) {
    CHECK(base.traj.pos(n).norm() == doctest::Approx(circle.r).epsilon(0.01));
  }
  CHECK(base.power.p[0] > 0.0);
  CHECK(base.power.p.maxCoeff() == base.power.p.minCoeff());
  const auto rep = energy_feasibility(base.traj, base.power, cfg);
  CHECK(std::abs(rep.residual) <= 1e-9 * rep.harvest_total);
  CHECK(sum_throughput(base.traj, base.power, cfg) <= lap_search(cfg).rate_sum);
}

}  // TEST_SUITE
