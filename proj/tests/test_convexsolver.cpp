#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "laseruav/convexsolver.hpp"
#include "laseruav/doublecircle.hpp"
#include "laseruav/errors.hpp"
#include "laseruav/model.hpp"
#include "laseruav/scp.hpp"
#include "laseruav/waterfill.hpp"
#include "oracles.hpp"
#include "toy.hpp"

using namespace laseruav;

namespace {

// Double-circle start with its water-filled power (P_ub budget).
struct Start {
  ScenarioConfig cfg;
  Trajectory traj;
  PowerProfile power;
};

Start reference_start() {
  Start s{ScenarioConfig::reference_setup(), {}, {}};
  const auto d = discretize(lap_search(s.cfg), s.cfg);
  s.traj = d.traj;
  const auto rep = energy_feasibility(d.traj, d.power, s.cfg);
  const double budget = s.cfg.eta * (rep.harvest_total - propulsion_ub_energy(d.traj, s.cfg));
  s.power = optimal_power(d.traj, budget, s.cfg).power;
  return s;
}

}  // namespace

TEST_SUITE("convexsolver") {

TEST_CASE("speed lower bound") {
  CHECK(speed_sq_lower_bound({3, 4}, {3, 4}) == doctest::Approx(25.0));
  CHECK(speed_sq_lower_bound({0, 0}, {3, 4}) == doctest::Approx(-25.0));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  int bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const Vec2 v(u(rng), u(rng)), vi(u(rng), u(rng));
    if (speed_sq_lower_bound(v, vi) > v.squaredNorm() + 1e-9) ++bad;
    CHECK(std::abs(speed_sq_lower_bound(vi, vi) - vi.squaredNorm()) <= 1e-9 * (1 + vi.squaredNorm()));
  }
  CHECK(bad == 0);
}

TEST_CASE("harvest tangent") {
  auto cfg = ScenarioConfig::reference_setup();
  CHECK(harvest_is_convex_in_zeta(cfg));
  const auto tg = linearize_harvest(1e4, cfg);
  CHECK(tg(1e4) == doctest::Approx(harvest_per_slot({0, 0}, cfg)).epsilon(1e-12));
  CHECK(tg(1e4) == doctest::Approx(224.45 * cfg.dt()).epsilon(1e-4));
  const double h = 1e-3 * 1e4;
  const double fd = (harvest_of_zeta(1e4 + h, cfg).value - harvest_of_zeta(1e4 - h, cfg).value) / (2 * h);
  CHECK(tg.slope == doctest::Approx(fd).epsilon(1e-6));
  CHECK(tg.slope < 0.0);

  std::mt19937 rng(9);
  const double lo = cfg.H * cfg.H, hi = 4 * (cfg.L * cfg.L + cfg.H * cfg.H);
  std::uniform_real_distribution<double> z(lo, hi);
  int bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const double zi = z(rng), zz = z(rng);
    const auto t = linearize_harvest(zi, cfg);
    if (t(zz) > harvest_of_zeta(zz, cfg).value * (1 + 1e-12)) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("rate lower bound") {
  auto cfg = ScenarioConfig::reference_setup();
  SUBCASE("single slot example") {
    Eigen::MatrixX2d qi(1, 2);
    qi << cfg.L, 0.0;  // distance^2 + H^2 = 1e4
    PowerProfile pw(1, 10.0);
    const auto rb = rate_lower_bound(qi, pw.p, cfg);
    CHECK(rb.alpha[0] == doctest::Approx(std::log2(1.1)).epsilon(1e-12));
    CHECK(rb.beta[0] == doctest::Approx(std::numbers::log2e * 1000.0 / (11000.0 * 10000.0)).epsilon(1e-12));
    CHECK(rb.beta[0] == doctest::Approx(1.3118e-5).epsilon(1e-4));
    Eigen::MatrixX2d q(1, 2);
    q << cfg.L, 50.0;
    CHECK(rb.value(q) <= rate_per_slot({cfg.L, 50.0}, 10.0, cfg));
    q << cfg.L - 50.0, 0.0;
    CHECK(rb.value(qi) == doctest::Approx(rate_per_slot({cfg.L, 0.0}, 10.0, cfg)).epsilon(1e-12));
  }
  SUBCASE("zero power drops the slot") {
    Eigen::MatrixX2d qi(2, 2);
    qi << 100, 0, 200, 50;
    Eigen::VectorXd p(2);
    p << 0.0, 4.0;
    const auto rb = rate_lower_bound(qi, p, cfg);
    CHECK(rb.alpha[0] == 0.0);
    CHECK(rb.beta[0] == 0.0);
    CHECK(rb.beta[1] > 0.0);
  }
  SUBCASE("exact at the expansion point and below elsewhere") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> x(-300.0, 900.0), pp(0.0, 100.0);
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
      Eigen::MatrixX2d qi(1, 2), q(1, 2);
      qi << x(rng), x(rng) - 300.0;
      q << x(rng), x(rng) - 300.0;
      Eigen::VectorXd p(1);
      p << pp(rng);
      const auto rb = rate_lower_bound(qi, p, cfg);
      const double exact_i = rate_per_slot(qi.row(0).transpose(), p[0], cfg);
      CHECK(std::abs(rb.value(qi) - exact_i) <= 1e-9);
      if (rb.value(q) > rate_per_slot(q.row(0).transpose(), p[0], cfg) + 1e-12) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("P_ub bounds the exact propulsion energy") {
  const auto cfg = ScenarioConfig::reference_setup();
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> sp(cfg.V_min, cfg.V_max), ang(0, 2 * std::numbers::pi),
      acc(0, cfg.a_max);
  for (int trial = 0; trial < 100; ++trial) {
    Trajectory traj(cfg.N), perp(cfg.N);
    for (std::size_t n = 0; n < cfg.N; ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      const double th = ang(rng), s = sp(rng), am = acc(rng);
      traj.v.row(i) << s * std::cos(th), s * std::sin(th);
      const double ta = ang(rng);
      traj.a.row(i) << am * std::cos(ta), am * std::sin(ta);
      perp.v.row(i) = traj.v.row(i);
      perp.a.row(i) << -am * std::sin(th), am * std::cos(th);
    }
    CHECK(propulsion_ub_energy(traj, cfg) >= propulsion_energy(traj, cfg).total());
    const double ub = propulsion_ub_energy(perp, cfg);
    CHECK(std::abs(ub - propulsion_energy(perp, cfg).total()) <= 1e-9 * ub);
  }
}

TEST_CASE("subproblem is tight at its expansion point") {
  const auto s = reference_start();
  const auto sp = build_subproblem(ScpIterate::at(s.traj, s.cfg), s.power, s.cfg);
  const auto x = sp.expansion_point();
  CHECK(sp.objective(x) == doctest::Approx(sum_throughput(s.traj, s.power, s.cfg)).epsilon(1e-12));
  const double exact = ub_energy_residual(s.traj, s.power, s.cfg);
  CHECK(std::abs(sp.energy_constraint(x) - exact) <= 1e-9 * std::max(1.0, std::abs(exact)) + 1e-9);
  CHECK(sp.equality_residual(x) <= 1e-9);
  for (std::size_t n = 0; n < s.cfg.N; ++n) {
    CHECK(std::abs(sp.slot_constraint(x, n, kZetaBound)) <= 1e-9 * sp.unpack_zeta(x)[static_cast<Eigen::Index>(n)]);
    CHECK(std::abs(sp.slot_constraint(x, n, kTauBound)) <= 1e-9 * (1 + s.traj.vel(n).squaredNorm()));
  }
}

TEST_CASE("invalid iterates are rejected") {
  auto s = reference_start();
  Trajectory bad = s.traj;
  bad.q(10, 0) += 1.0;
  CHECK_THROWS_AS(build_subproblem(ScpIterate::at(bad, s.cfg), s.power, s.cfg), InputError);
  CHECK_THROWS_AS(build_subproblem(ScpIterate::at(s.traj, s.cfg), PowerProfile(3, 1.0), s.cfg), InputError);
}

TEST_CASE("solve at the reference setup") {
  const auto s = reference_start();
  const auto sp = build_subproblem(ScpIterate::at(s.traj, s.cfg), s.power, s.cfg);
  const auto sol = solve(sp);
  CHECK(sol.kkt_residual <= 1e-6);
  CHECK(sol.newton_iterations <= 200);
  CHECK(sol.objective >= sp.objective(sp.expansion_point()) - 1e-9);
  // Conservative: the exact P_ub balance holds at the solution.
  CHECK(ub_energy_residual(sol.traj, s.power, s.cfg) <= 0.0);
  CHECK(energy_feasibility(sol.traj, s.power, s.cfg).residual <= 0.0);
  CHECK(sp.equality_residual(sol.x) <= 1e-6);
  for (std::size_t n = 0; n < s.cfg.N; ++n) {
    CHECK(sol.traj.vel(n).norm() >= s.cfg.V_min);
    CHECK(sol.traj.vel(n).norm() <= s.cfg.V_max);
    CHECK(sol.traj.acc(n).norm() <= s.cfg.a_max);
    CHECK((sol.traj.pos(n) - s.traj.pos(n)).cwiseAbs().maxCoeff() <= 50.0);
  }
  for (std::size_t k = 1; k < sol.stage_objectives.size(); ++k) {
    CHECK(sol.stage_objectives[k] >= sol.stage_objectives[k - 1] - 1e-9);
  }
}

TEST_CASE("zero power makes any feasible point optimal") {
  const auto s = reference_start();
  const PowerProfile zero(s.cfg.N, 0.0);
  const auto sp = build_subproblem(ScpIterate::at(s.traj, s.cfg), zero, s.cfg);
  const auto sol = solve(sp);
  CHECK(sol.kkt_residual <= 1e-6);
  CHECK(sol.objective == 0.0);
  CHECK(sp.energy_constraint(sol.x) <= 0.0);
}

TEST_CASE("four-slot toy against a grid oracle") {
  const auto toy = laseruav::testing::four_slot_toy();
  MESSAGE("solver ", toy.solver, " grid ", toy.grid);
  CHECK(toy.kkt <= 1e-6);
  CHECK(std::abs(toy.solver - toy.grid) <= 1e-3);
  CHECK(toy.off_axis <= 1e-6);
}

}  // TEST_SUITE
