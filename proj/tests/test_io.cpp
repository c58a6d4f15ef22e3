#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "laseruav/config.hpp"
#include "laseruav/errors.hpp"
#include "laseruav/trajectory.hpp"
#include "test_util.hpp"

using namespace laseruav;

TEST_SUITE("io") {

TEST_CASE("config round trip and unit conversion") {
  const auto cfg = load_config(laseruav::testing::scenario_dir() + "/reference_phi600.cfg");
  CHECK(cfg.gamma == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(cfg.phi == 600.0);
  CHECK(cfg.N == 200);
  CHECK(cfg.dt() == 0.5);
  std::stringstream s;
  write_config(s, cfg);
  const auto back = parse_config(s);
  CHECK(back.gamma == doctest::Approx(cfg.gamma).epsilon(1e-15));
  CHECK(back.L == cfg.L);
  CHECK(back.delta_theta == cfg.delta_theta);
  CHECK(back.V_min == cfg.V_min);
  CHECK(back.periodic_velocity == cfg.periodic_velocity);
}

TEST_CASE("config errors carry the line or key") {
  std::istringstream missing("L = 500\nT = 100\n");
  CHECK_THROWS_WITH_AS(parse_config(missing, "m.cfg"), doctest::Contains("missing required key"), InputError);

  std::stringstream good;
  write_config(good, ScenarioConfig::reference_setup());
  std::string text = good.str();
  std::istringstream bad(text + "phi = abc\n");
  CHECK_THROWS_AS(parse_config(bad, "b.cfg"), InputError);

  std::istringstream unknown("# comment\nbogus = 1\n");
  CHECK_THROWS_WITH_AS(parse_config(unknown, "u.cfg"), doctest::Contains("u.cfg:2"), InputError);

  std::string no_h;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("H ", 0) != 0) no_h += line + "\n";
  }
  std::istringstream without(no_h);
  CHECK_THROWS_WITH_AS(parse_config(without), doctest::Contains("'H'"), InputError);

  std::istringstream neg(text + "");
  auto cfg = parse_config(neg);
  cfg.V_min = cfg.V_max + 1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("trajectory CSV round trip") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double dt = 0.37;
  Eigen::MatrixX2d a(25, 2);
  for (int k = 0; k < 25; ++k) a.row(k) << 2 * u(rng), 2 * u(rng);
  const auto traj = rollout({123.456, -7.89}, {17.0, 3.0}, a, dt);
  PowerProfile pw(25);
  for (int k = 0; k < 25; ++k) pw.p[k] = 50 * (1 + u(rng));

  std::stringstream s;
  write_trajectory_csv(s, traj, pw, dt);
  const auto back = read_trajectory_csv(s);
  CHECK((back.traj.q - traj.q).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((back.traj.v - traj.v).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((back.traj.a - traj.a).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((back.power.p - pw.p).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(back.t[3] == doctest::Approx(3 * dt));

  std::istringstream empty("");
  CHECK_THROWS_AS(read_trajectory_csv(empty), InputError);
  std::istringstream header("a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(read_trajectory_csv(header), InputError);
  std::istringstream shortrow("n,t,x,y,vx,vy,ax,ay,p\n1,0,1,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(shortrow), InputError);
}

TEST_CASE("limit checks cite the slot") {
  auto cfg = ScenarioConfig::reference_setup();
  cfg.N = 5;
  auto traj = rollout({0, 0}, {20, 0}, Eigen::MatrixX2d::Zero(5, 2), cfg.dt());
  CHECK_NOTHROW(check_limits(traj, cfg));
  traj.a(3, 1) = 7.0;
  CHECK_THROWS_WITH_AS(check_limits(traj, cfg), doctest::Contains("4"), InputError);
  CHECK_THROWS_AS(check_power(PowerProfile(5, -1.0), 5), InputError);
}

}  // TEST_SUITE
