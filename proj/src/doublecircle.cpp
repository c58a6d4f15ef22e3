#include "laseruav/doublecircle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "laseruav/errors.hpp"
#include "laseruav/model.hpp"

namespace laseruav {

namespace {

constexpr double kRadiusLo = 5.0;
constexpr double kGridStep = 1.0;
constexpr double kRadiusTol = 1e-3;
constexpr double kLapStep = 0.01;
constexpr double kBootstrapPower = 5.0;

// Grid then golden-section refinement of a 1-D objective on [lo, hi].
template <typename F>
double maximize_1d(F&& f, double lo, double hi) {
  double best_x = lo;
  double best_f = f(lo);
  for (double x = lo + kGridStep; x <= hi + 1e-12; x += kGridStep) {
    const double fx = f(x);
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - kGridStep);
  double b = std::min(hi, best_x + kGridStep);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > kRadiusTol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  return f(mid) >= best_f ? mid : best_x;
}

double lap_time(double r, double n, double V) { return 2.0 * std::numbers::pi * r * n / V; }

}  // namespace

double optimal_circle_velocity(double r, const ScenarioConfig& cfg) {
  if (!(r > 0.0)) throw InputError("circle radius must be positive");
  const double k = cfg.c1 + cfg.c2 / (cfg.g * cfg.g * r * r);
  const double v = std::pow(cfg.c2 / (3.0 * k), 0.25);
  return std::max(std::min(v, cfg.V_max), cfg.V_min);
}

double harvest_circle_objective(double r, const ScenarioConfig& cfg) {
  const double V = optimal_circle_velocity(r, cfg);
  const double d = std::sqrt(cfg.H * cfg.H + r * r);
  return harvest_power_at_distance(d, cfg) - circular_flight_power(r, V, cfg);
}

double comm_circle_efficiency(double r, double p, const ScenarioConfig& cfg) {
  const double V = optimal_circle_velocity(r, cfg);
  const double rate = std::log2(1.0 + p * cfg.gamma / (r * r + cfg.H * cfg.H));
  return rate / circular_flight_power(r, V, cfg);
}

HarvestCircle solve_harvest_circle(const ScenarioConfig& cfg) {
  const double r = maximize_1d([&](double x) { return harvest_circle_objective(x, cfg); },
                               kRadiusLo, cfg.L / 2.0);
  return {r, optimal_circle_velocity(r, cfg), harvest_circle_objective(r, cfg)};
}

CommCircle solve_comm_circle(const ScenarioConfig& cfg, double p_guess) {
  if (!(p_guess > 0.0)) throw InputError("communication-circle power guess must be positive");
  const double r = maximize_1d([&](double x) { return comm_circle_efficiency(x, p_guess, cfg); },
                               kRadiusLo, cfg.L / 2.0);
  CommCircle out{r, optimal_circle_velocity(r, cfg), comm_circle_efficiency(r, p_guess, cfg), {}};
  const double radicand = cfg.c1 * std::pow(out.V, 4) - cfg.c2;
  if (radicand > 0.0) {
    out.closed_form_r =
        out.V * std::sqrt(cfg.H * std::sqrt(cfg.c2) / (cfg.g * std::sqrt(radicand)));
  }
  return out;
}

Transition transition_geometry(double r1, double r2, double V1, double V2,
                               const ScenarioConfig& cfg) {
  if (r1 < 0.0 || r2 < 0.0) throw GeometryError("circle radii must be non-negative");
  const double gap = cfg.L * cfg.L - (r1 + r2) * (r1 + r2);
  if (gap < 0.0) {
    std::ostringstream msg;
    msg << "circles overlap the tangent: r1 + r2 = " << r1 + r2 << " > L = " << cfg.L;
    throw GeometryError(msg.str());
  }
  Transition out;
  out.length = std::sqrt(gap);
  if (V1 == V2) {
    out.accel = 0.0;
    if (out.length > 0.0 && !(V1 > 0.0)) throw GeometryError("transition speed must be positive");
    out.duration = out.length > 0.0 ? out.length / V1 : 0.0;
    return out;
  }
  if (out.length == 0.0) {
    throw GeometryError("zero-length transition cannot change speed (infinite acceleration)");
  }
  out.accel = std::abs(V2 * V2 - V1 * V1) / (2.0 * out.length);
  out.duration = std::abs(V2 - V1) / out.accel;
  return out;
}

double DoubleCirclePlan::time_budget_residual(double T) const {
  return lap_time(r1, n1, V1) + t_transition + lap_time(r2, n2, V2) - T;
}

Trajectory sample_path(const PathFunction& path, const ScenarioConfig& cfg) {
  const std::size_t n = cfg.N;
  const double dt = cfg.dt();
  std::vector<PathState> states(n);
  for (std::size_t k = 0; k < n; ++k) states[k] = path(static_cast<double>(k) * dt);

  Eigen::MatrixX2d acc(static_cast<Eigen::Index>(n), 2);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    acc.row(static_cast<Eigen::Index>(k)) = ((states[k + 1].v - states[k].v) / dt).transpose();
  }
  acc.row(static_cast<Eigen::Index>(n - 1)) = states[n - 1].a.transpose();
  return rollout(states[0].q, states[0].v, acc, dt);
}

PathFunction double_circle_path(const DoubleCirclePlan& plan, const ScenarioConfig& cfg) {
  const double cos1 = (plan.r1 + plan.r2) / cfg.L;
  const double sin1 = -std::sqrt(std::max(0.0, 1.0 - cos1 * cos1));
  const double theta1 = std::atan2(sin1, cos1);
  const Vec2 normal(cos1, sin1);
  const Vec2 heading(-sin1, cos1);
  const Vec2 depart = plan.r1 * normal;
  const Vec2 centre2 = cfg.ground_station();
  const double t1 = lap_time(plan.r1, plan.n1, plan.V1);
  const double t12 = plan.t_transition;
  const double accel = plan.V2 >= plan.V1 ? plan.a12_mag : -plan.a12_mag;

  return [=](double t) -> PathState {
    if (t < t1) {
      const double th = theta1 - 2.0 * std::numbers::pi * plan.n1 + plan.V1 * t / plan.r1;
      const Vec2 radial(std::cos(th), std::sin(th));
      return {plan.r1 * radial, plan.V1 * Vec2(-radial.y(), radial.x()),
              -(plan.V1 * plan.V1 / plan.r1) * radial};
    }
    if (t < t1 + t12) {
      const double s = t - t1;
      return {depart + (plan.V1 * s + 0.5 * accel * s * s) * heading,
              (plan.V1 + accel * s) * heading, accel * heading};
    }
    const double s = t - t1 - t12;
    const double th = theta1 + std::numbers::pi - plan.V2 * s / plan.r2;
    const Vec2 radial(std::cos(th), std::sin(th));
    return {centre2 + plan.r2 * radial, plan.V2 * Vec2(radial.y(), -radial.x()),
            -(plan.V2 * plan.V2 / plan.r2) * radial};
  };
}

DiscretizedPlan discretize(const DoubleCirclePlan& plan, const ScenarioConfig& cfg) {
  DiscretizedPlan out;
  out.traj = sample_path(double_circle_path(plan, cfg), cfg);
  try {
    check_limits(out.traj, cfg, 1e-9);
  } catch (const InputError& e) {
    std::size_t slot = 0;
    for (std::size_t n = 0; n < out.traj.size() && slot == 0; ++n) {
      const double sp = out.traj.vel(n).norm();
      if (sp > cfg.V_max * (1 + 1e-9) || sp < cfg.V_min * (1 - 1e-9) ||
          out.traj.acc(n).norm() > cfg.a_max * (1 + 1e-9)) {
        slot = n + 1;
      }
    }
    throw DomainError(std::string("discretization: ") + e.what(), slot);
  }
  out.power = PowerProfile(cfg.N, plan.p_const);
  return out;
}

DoubleCirclePlan evaluate_laps(const HarvestCircle& harvest, const CommCircle& comm, double n1,
                               const ScenarioConfig& cfg) {
  const auto tr = transition_geometry(harvest.r, comm.r, harvest.V, comm.V, cfg);
  DoubleCirclePlan plan;
  plan.r1 = harvest.r;
  plan.V1 = harvest.V;
  plan.r2 = comm.r;
  plan.V2 = comm.V;
  plan.l12 = tr.length;
  plan.a12_mag = tr.accel;
  plan.t_transition = tr.duration;
  plan.n1 = n1;
  const double remaining = cfg.T - tr.duration - lap_time(harvest.r, n1, harvest.V);
  plan.n2 = std::max(0.0, remaining * comm.V / (2.0 * std::numbers::pi * comm.r));

  auto disc = discretize(plan, cfg);
  const auto report = energy_feasibility(disc.traj, disc.power, cfg);
  plan.net_energy = report.harvest_total - report.propulsion_total;
  plan.p_const = std::max(0.0, cfg.eta * plan.net_energy / cfg.T);
  plan.rate_sum = sum_throughput(disc.traj, PowerProfile(cfg.N, plan.p_const), cfg);
  return plan;
}

DoubleCirclePlan lap_search(const HarvestCircle& harvest, const CommCircle& comm,
                            const ScenarioConfig& cfg) {
  const auto tr = transition_geometry(harvest.r, comm.r, harvest.V, comm.V, cfg);
  if (tr.duration > cfg.T) {
    std::ostringstream msg;
    msg << "horizon too short: transition alone takes " << tr.duration << " s > T = " << cfg.T;
    throw InfeasibleError(msg.str());
  }
  const double n1_max =
      (cfg.T - tr.duration) * harvest.V / (2.0 * std::numbers::pi * harvest.r);

  std::vector<double> candidates;
  const auto steps = static_cast<std::size_t>(std::floor(n1_max / kLapStep + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) candidates.push_back(kLapStep * static_cast<double>(k));
  if (n1_max - candidates.back() > 1e-12) candidates.push_back(n1_max);

  std::optional<DoubleCirclePlan> best;
  std::optional<DomainError> first_failure;
  for (double n1 : candidates) {
    DoubleCirclePlan plan;
    try {
      plan = evaluate_laps(harvest, comm, n1, cfg);
    } catch (const DomainError& e) {
      if (!first_failure) first_failure = e;
      continue;
    }
    if (!best || plan.rate_sum > best->rate_sum ||
        (plan.rate_sum == best->rate_sum && plan.net_energy > best->net_energy)) {
      best = plan;
    }
  }
  if (!best) throw *first_failure;
  return *best;
}

DoubleCirclePlan lap_search(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto harvest = solve_harvest_circle(cfg);
  const auto first = lap_search(harvest, solve_comm_circle(cfg, kBootstrapPower), cfg);
  if (!(first.p_const > 0.0)) return first;
  DoubleCirclePlan second;
  try {
    second = lap_search(harvest, solve_comm_circle(cfg, first.p_const), cfg);
  } catch (const Error&) {
    return first;
  }
  return second.rate_sum > first.rate_sum ? second : first;
}

}  // namespace laseruav
