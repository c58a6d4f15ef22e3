#include "laseruav/trajectory.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "laseruav/errors.hpp"

namespace laseruav {

namespace {

constexpr const char* kHeader = "n,t,x,y,vx,vy,ax,ay,p";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw InputError(where + ": bad number '" + s + "'");
  }
  return value;
}

}  // namespace

Trajectory rollout(const Vec2& q0, const Vec2& v0, const Eigen::MatrixX2d& a, double dt) {
  const auto n = static_cast<std::size_t>(a.rows());
  Trajectory traj(n);
  traj.a = a;
  if (n == 0) return traj;
  traj.q.row(0) = q0.transpose();
  traj.v.row(0) = v0.transpose();
  for (Eigen::Index k = 0; k + 1 < a.rows(); ++k) {
    traj.v.row(k + 1) = traj.v.row(k) + a.row(k) * dt;
    traj.q.row(k + 1) = traj.q.row(k) + traj.v.row(k) * dt + 0.5 * a.row(k) * dt * dt;
  }
  return traj;
}

double kinematic_defect(const Trajectory& traj, double dt) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k + 1 < traj.q.rows(); ++k) {
    const Eigen::RowVector2d dv = traj.v.row(k + 1) - traj.v.row(k) - traj.a.row(k) * dt;
    const Eigen::RowVector2d dq = traj.q.row(k + 1) - traj.q.row(k) - traj.v.row(k) * dt -
                                  0.5 * traj.a.row(k) * dt * dt;
    worst = std::max({worst, dv.cwiseAbs().maxCoeff(), dq.cwiseAbs().maxCoeff()});
  }
  return worst;
}

void check_kinematics(const Trajectory& traj, double dt, double tol) {
  if (traj.v.rows() != traj.q.rows() || traj.a.rows() != traj.q.rows()) {
    throw InputError("trajectory arrays have mismatched lengths");
  }
  for (Eigen::Index k = 0; k + 1 < traj.q.rows(); ++k) {
    const Eigen::RowVector2d dv = traj.v.row(k + 1) - traj.v.row(k) - traj.a.row(k) * dt;
    const Eigen::RowVector2d dq = traj.q.row(k + 1) - traj.q.row(k) - traj.v.row(k) * dt -
                                  0.5 * traj.a.row(k) * dt * dt;
    const double err = std::max(dv.cwiseAbs().maxCoeff(), dq.cwiseAbs().maxCoeff());
    if (err > tol) {
      std::ostringstream msg;
      msg << "kinematics violated between slots " << k + 1 << " and " << k + 2 << " (defect "
          << err << ")";
      throw InputError(msg.str());
    }
  }
}

void check_limits(const Trajectory& traj, const ScenarioConfig& cfg, double rel_tol) {
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const double speed = traj.vel(n).norm();
    const double acc = traj.acc(n).norm();
    std::ostringstream msg;
    if (speed > cfg.V_max * (1 + rel_tol)) {
      msg << "slot " << n + 1 << ": speed " << speed << " exceeds V_max " << cfg.V_max;
    } else if (speed < cfg.V_min * (1 - rel_tol)) {
      msg << "slot " << n + 1 << ": speed " << speed << " below V_min " << cfg.V_min;
    } else if (acc > cfg.a_max * (1 + rel_tol)) {
      msg << "slot " << n + 1 << ": acceleration " << acc << " exceeds a_max " << cfg.a_max;
    } else {
      continue;
    }
    throw InputError(msg.str());
  }
}

void check_power(const PowerProfile& pw, std::size_t n) {
  if (pw.size() != n) {
    throw InputError("power profile has " + std::to_string(pw.size()) + " slots, expected " +
                     std::to_string(n));
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(pw.p[static_cast<Eigen::Index>(k)] >= 0.0)) {
      throw InputError("negative transmit power at slot " + std::to_string(k + 1));
    }
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const PowerProfile& pw,
                          double dt, const AuditColumns* audit) {
  check_power(pw, traj.size());
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  out << kHeader;
  if (audit) out << ",rate,harvest_J,propulsion_J";
  out << "\n";
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    out << n + 1 << ',' << num(static_cast<double>(n) * dt) << ',' << num(traj.q(i, 0)) << ','
        << num(traj.q(i, 1)) << ',' << num(traj.v(i, 0)) << ',' << num(traj.v(i, 1)) << ','
        << num(traj.a(i, 0)) << ',' << num(traj.a(i, 1)) << ',' << num(pw.p[i]);
    if (audit) {
      out << ',' << num(audit->rate[i]) << ',' << num(audit->harvest_J[i]) << ','
          << num(audit->propulsion_J[i]);
    }
    out << "\n";
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const PowerProfile& pw, double dt, const AuditColumns* audit) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  write_trajectory_csv(out, traj, pw, dt, audit);
}

TrajectoryFile read_trajectory_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  const auto header = split_csv(line);
  const auto expected = split_csv(kHeader);
  if (header.size() < expected.size() ||
      !std::equal(expected.begin(), expected.end(), header.begin())) {
    throw InputError(source + ":1: header must start with '" + std::string(kHeader) + "'");
  }
  std::vector<std::array<double, 9>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (cells.size() < expected.size()) throw InputError(where + ": too few columns");
    std::array<double, 9> row{};
    for (std::size_t c = 0; c < 9; ++c) row[c] = to_double(cells[c], where);
    if (row[0] != static_cast<double>(rows.size() + 1)) {
      throw InputError(where + ": slot index out of sequence");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw InputError(source + ": no data rows");

  TrajectoryFile file;
  file.traj = Trajectory(rows.size());
  file.power = PowerProfile(rows.size());
  file.t = Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    const auto& r = rows[n];
    file.t[i] = r[1];
    file.traj.q.row(i) << r[2], r[3];
    file.traj.v.row(i) << r[4], r[5];
    file.traj.a.row(i) << r[6], r[7];
    file.power.p[i] = r[8];
  }
  return file;
}

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return read_trajectory_csv(in, path.string());
}

}  // namespace laseruav
