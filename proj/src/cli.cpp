#include "laseruav/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "laseruav/doublecircle.hpp"
#include "laseruav/errors.hpp"
#include "laseruav/log.hpp"
#include "laseruav/model.hpp"
#include "laseruav/scp.hpp"

namespace laseruav {

namespace fs = std::filesystem;

const char* method_name(Method method) {
  switch (method) {
    case Method::kSingle: return "single";
    case Method::kDouble: return "double";
    case Method::kJoint: return "joint";
  }
  return "?";
}

MethodResult run_method(Method method, const ScenarioConfig& cfg) {
  MethodResult out;
  switch (method) {
    case Method::kSingle: {
      auto sc = single_circle_baseline(cfg);
      out.traj = std::move(sc.traj);
      out.power = std::move(sc.power);
      break;
    }
    case Method::kDouble: {
      const auto plan = lap_search(cfg);
      if (!(plan.p_const > 0.0)) throw InfeasibleError("infeasible: net harvested energy <= 0");
      auto d = discretize(plan, cfg);
      out.traj = std::move(d.traj);
      out.power = std::move(d.power);
      break;
    }
    case Method::kJoint: {
      auto j = alternate(cfg);
      out.traj = std::move(j.traj);
      out.power = std::move(j.power);
      break;
    }
  }
  out.rate_sum = sum_throughput(out.traj, out.power, cfg);
  return out;
}

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x + 0.0);  // no "-0"
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
}

AuditColumns audit_columns(const Trajectory& traj, const PowerProfile& pw,
                           const ScenarioConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(traj.size());
  AuditColumns cols{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const auto prop = propulsion_energy(traj, cfg);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto s = static_cast<std::size_t>(k);
    cols.rate[k] = rate_per_slot(traj.pos(s), pw.p[k], cfg);
    cols.harvest_J[k] = harvest_per_slot(traj.pos(s), cfg);
    cols.propulsion_J[k] = prop.per_slot[k];
  }
  return cols;
}

void write_trajectory(const fs::path& path, const Trajectory& traj, const PowerProfile& pw,
                      const ScenarioConfig& cfg) {
  const auto cols = audit_columns(traj, pw, cfg);
  write_trajectory_csv(path, traj, pw, cfg.dt(), &cols);
}

std::string plan_text(const DoubleCirclePlan& plan, const ScenarioConfig& cfg) {
  std::ostringstream s;
  s << "r1 = " << num(plan.r1) << "\nV1 = " << num(plan.V1) << "\nn1 = " << num(plan.n1)
    << "\nr2 = " << num(plan.r2) << "\nV2 = " << num(plan.V2) << "\nn2 = " << num(plan.n2)
    << "\nl12 = " << num(plan.l12) << "\na12_mag = " << num(plan.a12_mag)
    << "\nt_transition = " << num(plan.t_transition) << "\np_const = " << num(plan.p_const)
    << "\nnet_energy = " << num(plan.net_energy) << "\nrate_sum = " << num(plan.rate_sum)
    << "\ntime_budget_residual = " << num(plan.time_budget_residual(cfg.T)) << "\n";
  return s.str();
}

// Consumption with rounding-level slack: an evenly spread net energy can
// overshoot by a few ulps of the harvest total.
constexpr double kAuditRoundoff = 1e-9;

int cmd_plan(const fs::path& config, const fs::path& out_dir, std::ostream& out) {
  const auto cfg = load_config(config);
  const auto plan = lap_search(cfg);
  if (!(plan.p_const > 0.0)) {
    throw InfeasibleError("infeasible: net harvested energy <= 0 (" + num(plan.net_energy) +
                          " J)");
  }
  const auto d = discretize(plan, cfg);
  fs::create_directories(out_dir);
  const std::string text = plan_text(plan, cfg);
  write_text(out_dir / "plan.txt", text);
  write_trajectory(out_dir / "trajectory.csv", d.traj, d.power, cfg);
  out << text;
  return 0;
}

int cmd_optimize(const fs::path& config, const std::string& init, const fs::path& init_file,
                 const fs::path& out_dir, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load_config(config);
  Trajectory traj;
  PowerProfile power;
  if (init == "double") {
    const auto plan = lap_search(cfg);
    if (!(plan.p_const > 0.0)) throw InfeasibleError("infeasible: net harvested energy <= 0");
    auto d = discretize(plan, cfg);
    traj = std::move(d.traj);
    power = std::move(d.power);
  } else if (init == "single") {
    auto sc = single_circle_baseline(cfg);
    traj = std::move(sc.traj);
    power = std::move(sc.power);
  } else {
    if (init_file.empty()) throw InputError("--init file needs --init-file");
    auto f = read_trajectory_csv(init_file);
    if (f.traj.size() != cfg.N) {
      throw InputError(init_file.string() + ": " + std::to_string(f.traj.size()) +
                       " slots, config has N = " + std::to_string(cfg.N));
    }
    check_kinematics(f.traj, cfg.dt());
    check_limits(f.traj, cfg);
    check_power(f.power, cfg.N);
    traj = std::move(f.traj);
    power = std::move(f.power);
  }

  fs::create_directories(out_dir);
  JointResult res;
  try {
    res = alternate(traj, power, cfg);
  } catch (const ScpFailure& e) {
    std::ofstream trace(out_dir / "trace.csv");
    e.trace().write_csv(trace);
    throw;
  }
  {
    std::ofstream trace(out_dir / "trace.csv");
    if (!trace) throw InputError("cannot write trace");
    res.trace.write_csv(trace);
  }
  write_trajectory(out_dir / "trajectory.csv", res.traj, res.power, cfg);
  const auto summary = summarize(config.stem().string(), "joint", res.traj, res.power, cfg,
                                 seconds_since(t0));
  std::ostringstream text;
  summary.write(text);
  text << "initial_rate_sum = " << num(res.initial_objective) << "\n";
  write_text(out_dir / "summary.txt", text.str());
  out << "R_sum = " << num(res.objective) << "\n";
  return 0;
}

int cmd_audit(const fs::path& config, const fs::path& csv, std::ostream& out) {
  const auto cfg = load_config(config);
  const auto f = read_trajectory_csv(csv);
  if (f.traj.size() != cfg.N) {
    throw InputError(csv.string() + ": " + std::to_string(f.traj.size()) +
                     " slots, config has N = " + std::to_string(cfg.N));
  }
  check_power(f.power, cfg.N);
  const auto rep = energy_feasibility(f.traj, f.power, cfg);
  out << "harvest_total = " << num(rep.harvest_total) << "\n"
      << "propulsion_total = " << num(rep.propulsion_total) << "\n"
      << "kinetic_delta = " << num(rep.kinetic_delta) << "\n"
      << "comm_total = " << num(rep.comm_total) << "\n"
      << "residual = " << num(rep.residual) << "\n"
      << "rate_sum = " << num(sum_throughput(f.traj, f.power, cfg)) << "\n";
  if (rep.residual <= kAuditRoundoff * rep.harvest_total) {
    out << "status = feasible\n";
    return 0;
  }
  out << "status = infeasible\n";
  // Per-slot consumption minus harvest, largest first.
  const double dt = cfg.dt();
  std::vector<std::size_t> order(cfg.N);
  std::iota(order.begin(), order.end(), 0);
  auto excess = [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    return rep.propulsion_per_slot[i] + f.power.p[i] * dt / cfg.eta - rep.harvest_per_slot[i];
  };
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return excess(a) > excess(b); });
  out << "worst slots (n, consumption - harvest J):\n";
  for (std::size_t k = 0; k < std::min<std::size_t>(5, order.size()); ++k) {
    out << "  " << order[k] + 1 << " " << num(excess(order[k])) << "\n";
  }
  return 2;
}

int cmd_sweep(const fs::path& config, const std::string& var, const std::vector<double>& values,
              int jobs, const fs::path& out_path, std::ostream& out) {
  if (values.empty()) throw InputError("--values is empty");
  for (double v : values) {
    if (!(v > 0.0)) throw InputError("sweep values must be positive, got " + num(v));
  }
  const auto base = load_config(config);
  const Method methods[] = {Method::kSingle, Method::kDouble, Method::kJoint};
  const std::size_t cells = values.size() * 3;
  std::vector<std::optional<double>> table(cells);
  std::vector<std::string> failures(cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++) {
      ScenarioConfig cfg = base;
      (var == "T" ? cfg.T : cfg.phi) = values[i / 3];
      try {
        cfg.validate();
        table[i] = run_method(methods[i % 3], cfg).rate_sum;
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(cells)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << var << ",single,double,joint\n";
  for (std::size_t v = 0; v < values.size(); ++v) {
    csv << num(values[v]);
    for (std::size_t m = 0; m < 3; ++m) {
      const auto& cell = table[3 * v + m];
      csv << "," << (cell ? num(*cell) : "NA");
      if (!cell) {
        log::info("sweep ", var, "=", values[v], " ", method_name(methods[m]), ": ",
                  failures[3 * v + m]);
      }
    }
    csv << "\n";
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_text(out_path, csv.str());
  }
  return 0;
}

}  // namespace

void RunSummary::write(std::ostream& out) const {
  out << "scenario = " << scenario << "\nmethod = " << method << "\nR_sum = " << num(rate_sum)
      << "\nharvest_J = " << num(harvest) << "\npropulsion_J = " << num(propulsion)
      << "\ncomm_J = " << num(comm) << "\nresidual_J = " << num(residual)
      << "\nwall_time_s = " << num(wall_time) << "\nfeasible = " << (feasible() ? 1 : 0) << "\n";
}

RunSummary summarize(const std::string& scenario, const std::string& method,
                     const Trajectory& traj, const PowerProfile& pw, const ScenarioConfig& cfg,
                     double wall_time) {
  const auto rep = energy_feasibility(traj, pw, cfg);
  RunSummary s;
  s.scenario = scenario;
  s.method = method;
  s.rate_sum = sum_throughput(traj, pw, cfg);
  s.harvest = rep.harvest_total;
  s.propulsion = rep.propulsion_total;
  s.comm = rep.comm_total;
  s.residual = rep.residual;
  s.wall_time = wall_time;
  return s;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SolverError*>(&e)) return 3;
  if (dynamic_cast<const InfeasibleError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const GeometryError*>(&e)) {
    return 2;
  }
  return 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory and power planning for a laser-powered UAV relay"};
  app.require_subcommand(1);

  std::string config;
  fs::path out_dir = ".";

  auto* plan = app.add_subcommand("plan", "double-circle plan and its trajectory CSV");
  plan->add_option("-c,--config", config, "scenario file")->required();
  plan->add_option("-o,--out-dir", out_dir, "output directory");

  std::string init = "double";
  fs::path init_file;
  auto* opt = app.add_subcommand("optimize", "joint trajectory and power optimization");
  opt->add_option("-c,--config", config, "scenario file")->required();
  opt->add_option("--init", init, "starting point")
      ->check(CLI::IsMember({"double", "single", "file"}));
  opt->add_option("--init-file", init_file, "trajectory CSV for --init file");
  opt->add_option("-o,--out-dir", out_dir, "output directory");

  fs::path csv;
  auto* audit = app.add_subcommand("audit", "independent energy-balance check of a trajectory CSV");
  audit->add_option("-c,--config", config, "scenario file")->required();
  audit->add_option("-t,--trajectory", csv, "trajectory CSV")->required();

  std::string var = "T";
  std::vector<double> values;
  int jobs = 1;
  fs::path table;
  auto* sweep = app.add_subcommand("sweep", "R_sum of every method across one parameter");
  sweep->add_option("-c,--config", config, "scenario file")->required();
  sweep->add_option("--var", var, "swept parameter")->check(CLI::IsMember({"T", "phi"}));
  sweep->add_option("--values", values, "comma-separated values")->delimiter(',')->required();
  sweep->add_option("-j,--jobs", jobs, "parallel cells")->check(CLI::PositiveNumber);
  sweep->add_option("-o,--out", table, "output table (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*plan) return cmd_plan(config, out_dir, out);
    if (*opt) return cmd_optimize(config, init, init_file, out_dir, out);
    if (*audit) return cmd_audit(config, csv, out);
    if (*sweep) return cmd_sweep(config, var, values, jobs, table, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"laseruav"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace laseruav
