#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include <Eigen/Core>

#include "laseruav/config.hpp"

namespace laseruav {

using Vec2 = Eigen::Vector2d;

/// Per-slot horizontal state. Row n holds slot n+1 (storage is 0-based).
struct Trajectory {
  Eigen::MatrixX2d q;  // position, m
  Eigen::MatrixX2d v;  // velocity, m/s
  Eigen::MatrixX2d a;  // acceleration, m/s^2

  Trajectory() = default;
  explicit Trajectory(std::size_t n)
      : q(Eigen::MatrixX2d::Zero(static_cast<Eigen::Index>(n), 2)),
        v(Eigen::MatrixX2d::Zero(static_cast<Eigen::Index>(n), 2)),
        a(Eigen::MatrixX2d::Zero(static_cast<Eigen::Index>(n), 2)) {}

  std::size_t size() const { return static_cast<std::size_t>(q.rows()); }
  Vec2 pos(std::size_t n) const { return q.row(static_cast<Eigen::Index>(n)).transpose(); }
  Vec2 vel(std::size_t n) const { return v.row(static_cast<Eigen::Index>(n)).transpose(); }
  Vec2 acc(std::size_t n) const { return a.row(static_cast<Eigen::Index>(n)).transpose(); }
};

struct PowerProfile {
  Eigen::VectorXd p;  // transmit power per slot, W

  PowerProfile() = default;
  explicit PowerProfile(std::size_t n, double value = 0.0)
      : p(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), value)) {}
  std::size_t size() const { return static_cast<std::size_t>(p.size()); }
};

/// Builds v and q from q[1], v[1] and the accelerations using
///   v[n+1] = v[n] + a[n] dt,   q[n+1] = q[n] + v[n] dt + a[n] dt^2 / 2.
Trajectory rollout(const Vec2& q0, const Vec2& v0, const Eigen::MatrixX2d& a, double dt);

/// Largest violation of the two update equations over all slots.
double kinematic_defect(const Trajectory& traj, double dt);

/// Throws InputError citing the first (1-based) slot whose update equations
/// are violated by more than `tol`.
void check_kinematics(const Trajectory& traj, double dt, double tol = 1e-9);

/// Throws InputError citing the first slot breaking V_min <= |v| <= V_max or
/// |a| <= a_max (each with relative slack `rel_tol`).
void check_limits(const Trajectory& traj, const ScenarioConfig& cfg, double rel_tol = 1e-9);

/// Throws InputError if the profile has the wrong length or a negative entry.
void check_power(const PowerProfile& pw, std::size_t n);

/// Optional per-slot audit columns appended after `p`.
struct AuditColumns {
  Eigen::VectorXd rate;
  Eigen::VectorXd harvest_J;
  Eigen::VectorXd propulsion_J;
};

/// CSV with header `n,t,x,y,vx,vy,ax,ay,p`, 1-based n, t = (n-1) dt, values
/// at 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const PowerProfile& pw,
                          double dt, const AuditColumns* audit = nullptr);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const PowerProfile& pw, double dt, const AuditColumns* audit = nullptr);

struct TrajectoryFile {
  Trajectory traj;
  PowerProfile power;
  Eigen::VectorXd t;
};

/// Reads the CSV schema above; extra trailing columns are ignored. Throws
/// InputError on an empty file, a bad header, or a malformed row.
TrajectoryFile read_trajectory_csv(std::istream& in, const std::string& source = "<csv>");
TrajectoryFile read_trajectory_csv(const std::filesystem::path& path);

}  // namespace laseruav
