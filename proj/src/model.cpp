#include "laseruav/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "laseruav/errors.hpp"

namespace laseruav {

namespace {

void require_same_length(const Trajectory& traj, const PowerProfile& pw) {
  if (traj.size() != pw.size()) {
    throw InputError("trajectory has " + std::to_string(traj.size()) +
                     " slots but power profile has " + std::to_string(pw.size()));
  }
}

double slant_distance(const Vec2& q, const ScenarioConfig& cfg) {
  return std::sqrt(q.squaredNorm() + cfg.H * cfg.H);
}

}  // namespace

double link_distance_sq(const Vec2& q, const ScenarioConfig& cfg) {
  return (q - cfg.ground_station()).squaredNorm() + cfg.H * cfg.H;
}

double rate_per_slot(const Vec2& q, double p, const ScenarioConfig& cfg) {
  return std::log2(1.0 + p * cfg.gamma / link_distance_sq(q, cfg));
}

Vec2 rate_gradient(const Vec2& q, double p, const ScenarioConfig& cfg) {
  const double s = link_distance_sq(q, cfg);
  const double snr = p * cfg.gamma;
  return -(2.0 * snr / (std::numbers::ln2 * s * (s + snr))) * (q - cfg.ground_station());
}

double sum_throughput(const Trajectory& traj, const PowerProfile& pw, const ScenarioConfig& cfg) {
  require_same_length(traj, pw);
  double total = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    total += rate_per_slot(traj.pos(n), pw.p[static_cast<Eigen::Index>(n)], cfg);
  }
  return cfg.dt() * total;
}

double comm_energy(const PowerProfile& pw, const ScenarioConfig& cfg) {
  return pw.p.sum() * cfg.dt() / cfg.eta;
}

double propulsion_power(const Vec2& v, const Vec2& a, const ScenarioConfig& cfg,
                        double smoothing) {
  const double s2 = v.squaredNorm();
  const double s = std::sqrt(s2);
  const double av = a.dot(v);
  const double cubic = smoothing > 0.0 ? cfg.c1 * std::pow(s2 + smoothing * smoothing, 1.5)
                                       : cfg.c1 * s2 * s;
  return cubic + (cfg.c2 / s) * (1.0 + (a.squaredNorm() - av * av / s2) / (cfg.g * cfg.g));
}

PropulsionGradient propulsion_power_gradient(const Vec2& v, const Vec2& a,
                                             const ScenarioConfig& cfg, double smoothing) {
  const double s2 = v.squaredNorm();
  const double s = std::sqrt(s2);
  const double s3 = s2 * s;
  const double s5 = s3 * s2;
  const double av = a.dot(v);
  const double a2 = a.squaredNorm();
  const double k = cfg.c2 / (cfg.g * cfg.g);
  const double w = s2 + smoothing * smoothing;

  PropulsionGradient out;
  out.value = propulsion_power(v, a, cfg, smoothing);
  out.dv = 3.0 * cfg.c1 * std::sqrt(w) * v - (cfg.c2 / s3) * v +
           k * (-(a2 / s3) * v - (2.0 * av / s3) * a + (3.0 * av * av / s5) * v);
  out.da = k * ((2.0 / s) * a - (2.0 * av / s3) * v);
  return out;
}

double propulsion_ub_power(const Vec2& v, const Vec2& a, const ScenarioConfig& cfg) {
  const double s = v.norm();
  return cfg.c1 * s * s * s + (cfg.c2 / s) * (1.0 + a.squaredNorm() / (cfg.g * cfg.g));
}

double circular_flight_power(double r, double V, const ScenarioConfig& cfg) {
  return (cfg.c1 + cfg.c2 / (cfg.g * cfg.g * r * r)) * V * V * V + cfg.c2 / V;
}

PropulsionBreakdown propulsion_energy(const Trajectory& traj, const ScenarioConfig& cfg) {
  const double dt = cfg.dt();
  PropulsionBreakdown out;
  out.per_slot = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(traj.size()));
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const Vec2 v = traj.vel(n);
    if (v.norm() < cfg.V_min) {
      std::ostringstream msg;
      msg << "slot " << n + 1 << ": speed " << v.norm() << " below V_min " << cfg.V_min;
      throw DomainError(msg.str(), n + 1);
    }
    out.per_slot[static_cast<Eigen::Index>(n)] = dt * propulsion_power(v, traj.acc(n), cfg);
  }
  out.integral = out.per_slot.sum();
  if (traj.size() > 0) {
    out.kinetic_delta =
        0.5 * cfg.m * (traj.vel(traj.size() - 1).squaredNorm() - traj.vel(0).squaredNorm());
  }
  return out;
}

double propulsion_ub_energy(const Trajectory& traj, const ScenarioConfig& cfg) {
  const double dt = cfg.dt();
  double total = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const Vec2 v = traj.vel(n);
    if (v.norm() < cfg.V_min) {
      throw DomainError("slot " + std::to_string(n + 1) + ": speed below V_min", n + 1);
    }
    total += dt * propulsion_ub_power(v, traj.acc(n), cfg);
  }
  if (traj.size() > 0) {
    total += 0.5 * cfg.m * (traj.vel(traj.size() - 1).squaredNorm() - traj.vel(0).squaredNorm());
  }
  return total;
}

double harvest_power_at_distance(double d, const ScenarioConfig& cfg) {
  const double spread = cfg.D_beam + d * cfg.delta_theta;
  return cfg.C_laser * cfg.phi * std::exp(-cfg.alpha_atten * d) / (spread * spread);
}

double harvest_per_slot(const Vec2& q, const ScenarioConfig& cfg) {
  return cfg.dt() * harvest_power_at_distance(slant_distance(q, cfg), cfg);
}

Vec2 harvest_gradient(const Vec2& q, const ScenarioConfig& cfg) {
  const double d = slant_distance(q, cfg);
  const double spread = cfg.D_beam + d * cfg.delta_theta;
  const double h = harvest_per_slot(q, cfg);
  const double dh_dd = h * (-cfg.alpha_atten - 2.0 * cfg.delta_theta / spread);
  return (dh_dd / d) * q;
}

HarvestZeta harvest_of_zeta(double zeta, const ScenarioConfig& cfg) {
  const double d = std::sqrt(zeta);
  const double spread = cfg.D_beam + d * cfg.delta_theta;
  const double h = cfg.dt() * harvest_power_at_distance(d, cfg);
  const double rate = -cfg.alpha_atten - 2.0 * cfg.delta_theta / spread;
  const double hd = h * rate;
  const double hdd =
      h * (rate * rate + 2.0 * cfg.delta_theta * cfg.delta_theta / (spread * spread));
  HarvestZeta out;
  out.value = h;
  out.d1 = hd / (2.0 * d);
  out.d2 = (hdd * d - hd) / (4.0 * d * d * d);
  return out;
}

EnergyReport energy_feasibility(const Trajectory& traj, const PowerProfile& pw,
                                const ScenarioConfig& cfg) {
  require_same_length(traj, pw);
  const auto prop = propulsion_energy(traj, cfg);
  EnergyReport rep;
  rep.harvest_per_slot = Eigen::VectorXd(static_cast<Eigen::Index>(traj.size()));
  for (std::size_t n = 0; n < traj.size(); ++n) {
    rep.harvest_per_slot[static_cast<Eigen::Index>(n)] = harvest_per_slot(traj.pos(n), cfg);
  }
  rep.propulsion_per_slot = prop.per_slot;
  rep.kinetic_delta = prop.kinetic_delta;
  rep.propulsion_total = prop.total();
  rep.comm_total = comm_energy(pw, cfg);
  rep.harvest_total = rep.harvest_per_slot.sum();
  rep.residual = (rep.comm_total + rep.propulsion_total) - rep.harvest_total;
  return rep;
}

}  // namespace laseruav
