#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

namespace laseruav {

/// Physical and algorithmic constants of one mission scenario. SI units
/// throughout. The laser transmitter sits at the origin and the ground
/// station at (L, 0); the UAV flies at constant altitude H.
struct ScenarioConfig {
  double L = 500.0;             // transmitter to ground-station distance, m
  double H = 100.0;             // flight altitude, m
  double T = 100.0;             // mission duration, s
  std::size_t N = 200;          // number of slots
  double gamma = 100.0;         // reference SNR (linear)
  double eta = 1.0;             // RF chain efficiency
  double c1 = 9.26e-4;          // kg/m
  double c2 = 2250.0;           // kg m^3 / s^4
  double g = 9.8;               // m/s^2
  double m = 0.0;               // kg; only enters the kinetic-energy delta
  double phi = 600.0;           // laser transmit power, W
  double C_laser = 0.004;       // omega * A * chi, m^2
  double alpha_atten = 1e-6;    // 1/m
  double D_beam = 0.1;          // m
  double delta_theta = 3.4e-5;  // rad
  double V_max = 60.0;          // m/s
  double a_max = 6.0;           // m/s^2
  double V_min = 3.0;           // m/s

  // Trajectory-optimization switches.
  bool periodic_velocity = false;  // impose v[1] = v[N]
  bool pin_start = false;          // keep q[1] at the initial trajectory's q[1]

  double dt() const { return T / static_cast<double>(N); }
  Eigen::Vector2d ground_station() const { return {L, 0.0}; }

  /// Throws InputError naming the first violated invariant.
  void validate() const;

  /// The numerical-results setup: L=500, H=100, gamma=20 dB, phi=600 W, T=100 s.
  static ScenarioConfig reference_setup();
};

double db_to_linear(double db);
double linear_to_db(double linear);

/// Parses the flat `key = value` format. `#` starts a comment. Keys are the
/// field names above with `gamma_db` in place of `gamma`. Errors carry the
/// source name and line number.
ScenarioConfig parse_config(std::istream& in, const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// Writes every key so that parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const ScenarioConfig& cfg);

}  // namespace laseruav
