#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "laseruav/cli.hpp"
#include "laseruav/config.hpp"
#include "laseruav/doublecircle.hpp"
#include "laseruav/errors.hpp"
#include "laseruav/model.hpp"
#include "laseruav/scp.hpp"
#include "laseruav/trajectory.hpp"
#include "laseruav/waterfill.hpp"

namespace py = pybind11;
using namespace laseruav;

namespace {

Method parse_method(const std::string& name) {
  if (name == "single") return Method::kSingle;
  if (name == "double") return Method::kDouble;
  if (name == "joint") return Method::kJoint;
  throw InputError("unknown method '" + name + "' (single, double, joint)");
}

Trajectory make_trajectory(const Eigen::MatrixX2d& q, const Eigen::MatrixX2d& v,
                           const Eigen::MatrixX2d& a) {
  if (q.rows() != v.rows() || q.rows() != a.rows()) {
    throw InputError("q, v and a must have the same number of rows");
  }
  Trajectory t;
  t.q = q;
  t.v = v;
  t.a = a;
  return t;
}

PowerProfile make_power(const Eigen::VectorXd& p) {
  PowerProfile pw;
  pw.p = p;
  return pw;
}

}  // namespace

PYBIND11_MODULE(_laseruav, m) {
  m.doc() = "Trajectory and power planning for a laser-charged fixed-wing UAV relay.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_static("reference_setup", &ScenarioConfig::reference_setup)
      .def_readwrite("L", &ScenarioConfig::L)
      .def_readwrite("H", &ScenarioConfig::H)
      .def_readwrite("T", &ScenarioConfig::T)
      .def_readwrite("N", &ScenarioConfig::N)
      .def_readwrite("gamma", &ScenarioConfig::gamma)
      .def_readwrite("eta", &ScenarioConfig::eta)
      .def_readwrite("c1", &ScenarioConfig::c1)
      .def_readwrite("c2", &ScenarioConfig::c2)
      .def_readwrite("g", &ScenarioConfig::g)
      .def_readwrite("m", &ScenarioConfig::m)
      .def_readwrite("phi", &ScenarioConfig::phi)
      .def_readwrite("C_laser", &ScenarioConfig::C_laser)
      .def_readwrite("alpha_atten", &ScenarioConfig::alpha_atten)
      .def_readwrite("D_beam", &ScenarioConfig::D_beam)
      .def_readwrite("delta_theta", &ScenarioConfig::delta_theta)
      .def_readwrite("V_max", &ScenarioConfig::V_max)
      .def_readwrite("a_max", &ScenarioConfig::a_max)
      .def_readwrite("V_min", &ScenarioConfig::V_min)
      .def_readwrite("periodic_velocity", &ScenarioConfig::periodic_velocity)
      .def_readwrite("pin_start", &ScenarioConfig::pin_start)
      .def_property_readonly("dt", &ScenarioConfig::dt)
      .def("validate", &ScenarioConfig::validate);

  m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));

  py::class_<DoubleCirclePlan>(m, "DoubleCirclePlan")
      .def_readonly("r1", &DoubleCirclePlan::r1)
      .def_readonly("V1", &DoubleCirclePlan::V1)
      .def_readonly("n1", &DoubleCirclePlan::n1)
      .def_readonly("r2", &DoubleCirclePlan::r2)
      .def_readonly("V2", &DoubleCirclePlan::V2)
      .def_readonly("n2", &DoubleCirclePlan::n2)
      .def_readonly("l12", &DoubleCirclePlan::l12)
      .def_readonly("a12", &DoubleCirclePlan::a12_mag)
      .def_readonly("t_transition", &DoubleCirclePlan::t_transition)
      .def_readonly("p", &DoubleCirclePlan::p_const)
      .def_readonly("net_energy", &DoubleCirclePlan::net_energy)
      .def_readonly("rate_sum", &DoubleCirclePlan::rate_sum);

  m.def("plan_double_circle", py::overload_cast<const ScenarioConfig&>(&lap_search), py::arg("cfg"));

  m.def(
      "run_method",
      [](const std::string& method, const ScenarioConfig& cfg) {
        MethodResult r;
        {
          py::gil_scoped_release release;
          r = run_method(parse_method(method), cfg);
        }
        py::dict out;
        out["q"] = r.traj.q;
        out["v"] = r.traj.v;
        out["a"] = r.traj.a;
        out["p"] = r.power.p;
        out["rate_sum"] = r.rate_sum;
        return out;
      },
      py::arg("method"), py::arg("cfg"),
      "Plans with 'single', 'double' or 'joint'; returns q, v, a, p and rate_sum.");

  m.def(
      "water_fill",
      [](const Eigen::VectorXd& floors, double budget, double dt) {
        const auto sol = water_fill(floors, budget, dt);
        return py::make_tuple(sol.power.p, sol.level);
      },
      py::arg("floors"), py::arg("budget"), py::arg("dt"),
      "Optimal powers and water level for channel floors and an energy budget.");

  m.def(
      "audit",
      [](const Eigen::MatrixX2d& q, const Eigen::MatrixX2d& v, const Eigen::MatrixX2d& a,
         const Eigen::VectorXd& p, const ScenarioConfig& cfg) {
        const auto rep = energy_feasibility(make_trajectory(q, v, a), make_power(p), cfg);
        py::dict out;
        out["harvest"] = rep.harvest_total;
        out["propulsion"] = rep.propulsion_total;
        out["comm"] = rep.comm_total;
        out["residual"] = rep.residual;
        return out;
      },
      py::arg("q"), py::arg("v"), py::arg("a"), py::arg("p"), py::arg("cfg"),
      "Exact energy balance; residual <= 0 means the plan is self-sustaining.");

  m.def(
      "sum_throughput",
      [](const Eigen::MatrixX2d& q, const Eigen::VectorXd& p, const ScenarioConfig& cfg) {
        Trajectory t(static_cast<std::size_t>(q.rows()));
        t.q = q;
        return sum_throughput(t, make_power(p), cfg);
      },
      py::arg("q"), py::arg("p"), py::arg("cfg"));
}
