#include "laseruav/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "laseruav/errors.hpp"

namespace laseruav {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw InputError(where + ": expected a number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& where) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw InputError(where + ": expected a boolean, got '" + text + "'");
}

// Keys that must be present; everything else has a default.
const std::set<std::string> kRequired = {
    "L",   "H",       "T",           "gamma_db",    "eta",    "c1",          "c2",
    "phi", "C_laser", "alpha_atten", "D_beam",      "V_max",  "a_max",       "delta_theta"};

const std::set<std::string> kOptional = {"N", "g", "m", "V_min", "periodic_velocity",
                                         "pin_start"};

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InputError("invalid config: " + msg); };
  if (!(L > 0)) fail("L must be > 0");
  if (!(H > 0)) fail("H must be > 0");
  if (!(T > 0)) fail("T must be > 0");
  if (N < 2) fail("N must be >= 2");
  if (!(gamma > 0)) fail("gamma must be > 0");
  if (!(eta > 0 && eta <= 1)) fail("eta must lie in (0, 1]");
  if (!(c1 > 0)) fail("c1 must be > 0");
  if (!(c2 > 0)) fail("c2 must be > 0");
  if (!(g > 0)) fail("g must be > 0");
  if (!(m >= 0)) fail("m must be >= 0");
  if (!(phi >= 0)) fail("phi must be >= 0");
  if (!(C_laser >= 0)) fail("C_laser must be >= 0");
  if (!(alpha_atten >= 0)) fail("alpha_atten must be >= 0");
  if (!(D_beam > 0)) fail("D_beam must be > 0");
  if (!(delta_theta > 0)) fail("delta_theta must be > 0");
  if (!(V_min > 0 && V_min < V_max)) fail("need 0 < V_min < V_max");
  if (!(a_max > 0)) fail("a_max must be > 0");
}

ScenarioConfig ScenarioConfig::reference_setup() { return ScenarioConfig{}; }

ScenarioConfig parse_config(std::istream& in, const std::string& source) {
  ScenarioConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!kRequired.count(key) && !kOptional.count(key)) {
      throw InputError(where + ": unknown key '" + key + "'");
    }
    if (seen.count(key)) {
      throw InputError(where + ": duplicate key '" + key + "' (first on line " +
                       std::to_string(seen[key]) + ")");
    }
    seen[key] = lineno;

    if (key == "N") {
      const double n = parse_double(val, where);
      if (n < 2 || n != std::floor(n)) throw InputError(where + ": N must be an integer >= 2");
      cfg.N = static_cast<std::size_t>(n);
    } else if (key == "periodic_velocity") {
      cfg.periodic_velocity = parse_bool(val, where);
    } else if (key == "pin_start") {
      cfg.pin_start = parse_bool(val, where);
    } else {
      const double x = parse_double(val, where);
      if (key == "L") cfg.L = x;
      else if (key == "H") cfg.H = x;
      else if (key == "T") cfg.T = x;
      else if (key == "gamma_db") cfg.gamma = db_to_linear(x);
      else if (key == "eta") cfg.eta = x;
      else if (key == "c1") cfg.c1 = x;
      else if (key == "c2") cfg.c2 = x;
      else if (key == "g") cfg.g = x;
      else if (key == "m") cfg.m = x;
      else if (key == "phi") cfg.phi = x;
      else if (key == "C_laser") cfg.C_laser = x;
      else if (key == "alpha_atten") cfg.alpha_atten = x;
      else if (key == "D_beam") cfg.D_beam = x;
      else if (key == "delta_theta") cfg.delta_theta = x;
      else if (key == "V_max") cfg.V_max = x;
      else if (key == "a_max") cfg.a_max = x;
      else if (key == "V_min") cfg.V_min = x;
    }
  }
  for (const auto& key : kRequired) {
    if (!seen.count(key)) throw InputError(source + ": missing required key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  return parse_config(in, path.string());
}

void write_config(std::ostream& out, const ScenarioConfig& c) {
  out << std::setprecision(17);
  out << "L = " << c.L << "\nH = " << c.H << "\nT = " << c.T << "\nN = " << c.N
      << "\ngamma_db = " << linear_to_db(c.gamma) << "\neta = " << c.eta << "\nc1 = " << c.c1
      << "\nc2 = " << c.c2 << "\ng = " << c.g << "\nm = " << c.m << "\nphi = " << c.phi
      << "\nC_laser = " << c.C_laser << "\nalpha_atten = " << c.alpha_atten
      << "\nD_beam = " << c.D_beam << "\ndelta_theta = " << c.delta_theta
      << "\nV_max = " << c.V_max << "\na_max = " << c.a_max << "\nV_min = " << c.V_min
      << "\nperiodic_velocity = " << (c.periodic_velocity ? "true" : "false")
      << "\npin_start = " << (c.pin_start ? "true" : "false") << "\n";
}

}  // namespace laseruav
