#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "laseruav/config.hpp"
#include "laseruav/trajectory.hpp"

namespace laseruav {

enum class Method { kSingle, kDouble, kJoint };
const char* method_name(Method method);

/// Trajectory and power produced by one planning method.
struct MethodResult {
  Trajectory traj;
  PowerProfile power;
  double rate_sum = 0.0;
};
MethodResult run_method(Method method, const ScenarioConfig& cfg);

struct RunSummary {
  std::string scenario;
  std::string method;
  double rate_sum = 0.0;    // bits/Hz
  double harvest = 0.0;     // J
  double propulsion = 0.0;  // J, exact model including the kinetic delta
  double comm = 0.0;        // J
  double residual = 0.0;    // J
  double wall_time = 0.0;   // s
  bool feasible() const { return residual <= 0.0; }

  /// `key = value` lines, numbers at 17 significant digits.
  void write(std::ostream& out) const;
};
RunSummary summarize(const std::string& scenario, const std::string& method,
                     const Trajectory& traj, const PowerProfile& pw, const ScenarioConfig& cfg,
                     double wall_time);

/// Exit-code contract: 0 success, 1 input error, 2 infeasible scenario
/// (also domain and geometry errors), 3 solver failure.
int exit_code_for(const std::exception& e);

/// Entry point of the `laseruav` tool. Subcommands: plan, optimize, audit,
/// sweep. Normal output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace laseruav
