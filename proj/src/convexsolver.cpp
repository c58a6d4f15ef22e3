#include "laseruav/convexsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "laseruav/log.hpp"
#include "laseruav/model.hpp"

namespace laseruav {

// ---------------------------------------------------------------------------
// Local bounds
// ---------------------------------------------------------------------------

double speed_sq_lower_bound(const Vec2& v, const Vec2& v_i) {
  return v_i.squaredNorm() + 2.0 * v_i.dot(v - v_i);
}

HarvestTangent linearize_harvest(double zeta_i, const ScenarioConfig& cfg) {
  const auto h = harvest_of_zeta(zeta_i, cfg);
  return {zeta_i, h.value, h.d1};
}

bool harvest_is_convex_in_zeta(const ScenarioConfig& cfg) {
  const double lo = cfg.H * cfg.H;
  const double hi = 4.0 * (cfg.L * cfg.L + cfg.H * cfg.H);
  constexpr int kPoints = 1000;
  const double step = (hi - lo) / (kPoints - 1);
  auto f = [&](double z) { return harvest_of_zeta(z, cfg).value; };
  for (int k = 1; k + 1 < kPoints; ++k) {
    const double z = lo + step * k;
    const double second = f(z - step) - 2.0 * f(z) + f(z + step);
    // Ignore differences at the rounding level of f.
    if (second < -64.0 * std::numeric_limits<double>::epsilon() * std::abs(f(z))) return false;
  }
  return true;
}

double RateLowerBound::value(const Eigen::MatrixX2d& q) const {
  double total = 0.0;
  for (Eigen::Index n = 0; n < q.rows(); ++n) {
    const double d2 = (q.row(n).transpose() - mu).squaredNorm();
    total += alpha[n] - beta[n] * (d2 - dist_sq_i[n]);
  }
  return total;
}

RateLowerBound rate_lower_bound(const Eigen::MatrixX2d& q_i, const Eigen::VectorXd& power,
                                const ScenarioConfig& cfg) {
  if (q_i.rows() != power.size()) throw InputError("rate bound: length mismatch");
  RateLowerBound out;
  const auto n = q_i.rows();
  out.alpha.resize(n);
  out.beta.resize(n);
  out.dist_sq_i.resize(n);
  out.mu = cfg.ground_station();
  const double h2 = cfg.H * cfg.H;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double d2 = (q_i.row(k).transpose() - out.mu).squaredNorm();
    const double snr = power[k] * cfg.gamma;
    out.dist_sq_i[k] = d2;
    out.alpha[k] = std::log2(1.0 + snr / (d2 + h2));
    out.beta[k] = std::numbers::log2e * snr / ((snr + d2 + h2) * (d2 + h2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subproblem
// ---------------------------------------------------------------------------

ScpIterate ScpIterate::at(const Trajectory& traj, const ScenarioConfig& cfg) {
  ScpIterate it;
  it.traj = traj;
  const auto n = static_cast<Eigen::Index>(traj.size());
  it.zeta.resize(n);
  it.tau.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    it.zeta[k] = traj.q.row(k).squaredNorm() + cfg.H * cfg.H;
    it.tau[k] = traj.v.row(k).norm();
  }
  return it;
}

ConvexSubproblem::ConvexSubproblem(ScpIterate iterate, const PowerProfile& pw,
                                   const ScenarioConfig& cfg, SubproblemOptions options)
    : iterate_(std::move(iterate)), power_(pw), cfg_(cfg), options_(options) {
  rate_ = rate_lower_bound(iterate_.traj.q, power_.p, cfg_);
  tangents_.reserve(cfg_.N);
  for (std::size_t n = 0; n < cfg_.N; ++n) {
    tangents_.push_back(linearize_harvest(iterate_.zeta[static_cast<Eigen::Index>(n)], cfg_));
  }
  comm_energy_ = laseruav::comm_energy(power_, cfg_);
}

Eigen::VectorXd ConvexSubproblem::pack(const Trajectory& traj, const Eigen::VectorXd& zeta,
                                       const Eigen::VectorXd& tau) const {
  Eigen::VectorXd x(num_vars());
  for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(cfg_.N); ++n) {
    auto s = x.segment<kVarsPerSlot>(kVarsPerSlot * n);
    s << traj.q(n, 0), traj.q(n, 1), traj.v(n, 0), traj.v(n, 1), traj.a(n, 0), traj.a(n, 1),
        zeta[n], tau[n];
  }
  return x;
}

Trajectory ConvexSubproblem::unpack_trajectory(const Eigen::VectorXd& x) const {
  Trajectory traj(cfg_.N);
  for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(cfg_.N); ++n) {
    const auto s = x.segment<kVarsPerSlot>(kVarsPerSlot * n);
    traj.q.row(n) << s[0], s[1];
    traj.v.row(n) << s[2], s[3];
    traj.a.row(n) << s[4], s[5];
  }
  return traj;
}

Eigen::VectorXd ConvexSubproblem::unpack_zeta(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(cfg_.N));
  for (Eigen::Index n = 0; n < z.size(); ++n) z[n] = x[kVarsPerSlot * n + 6];
  return z;
}

Eigen::VectorXd ConvexSubproblem::unpack_tau(const Eigen::VectorXd& x) const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(cfg_.N));
  for (Eigen::Index n = 0; n < t.size(); ++n) t[n] = x[kVarsPerSlot * n + 7];
  return t;
}

double ConvexSubproblem::objective(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(cfg_.N); ++n) {
    const Vec2 q(x[kVarsPerSlot * n], x[kVarsPerSlot * n + 1]);
    const double d2 = (q - rate_.mu).squaredNorm();
    total += rate_.alpha[n] - rate_.beta[n] * (d2 - rate_.dist_sq_i[n]);
  }
  return cfg_.dt() * total;
}

double ConvexSubproblem::slot_constraint(const Eigen::VectorXd& x, std::size_t slot,
                                         SlotConstraint which) const {
  const auto n = static_cast<Eigen::Index>(slot);
  const auto s = x.segment<kVarsPerSlot>(kVarsPerSlot * n);
  const Vec2 q(s[0], s[1]);
  const Vec2 v(s[2], s[3]);
  const Vec2 a(s[4], s[5]);
  const double rho = options_.trust_radius;
  switch (which) {
    case kAccelCap: return a.squaredNorm() - cfg_.a_max * cfg_.a_max;
    case kSpeedCap: return v.squaredNorm() - cfg_.V_max * cfg_.V_max;
    case kZetaBound: return q.squaredNorm() + cfg_.H * cfg_.H - s[6];
    case kTauBound: return s[7] * s[7] - speed_sq_lower_bound(v, iterate_.traj.vel(slot));
    case kTauFloor: return cfg_.V_min - s[7];
    case kTrustXHi: return (q.x() - iterate_.traj.q(n, 0)) - rho;
    case kTrustXLo: return -(q.x() - iterate_.traj.q(n, 0)) - rho;
    case kTrustYHi: return (q.y() - iterate_.traj.q(n, 1)) - rho;
    case kTrustYLo: return -(q.y() - iterate_.traj.q(n, 1)) - rho;
    default: break;
  }
  throw InputError("unknown slot constraint");
}

double ConvexSubproblem::energy_constraint(const Eigen::VectorXd& x) const {
  const double dt = cfg_.dt();
  const double k = cfg_.c2 / (cfg_.g * cfg_.g);
  const double eps2 = options_.smoothing * options_.smoothing;
  double consumed = comm_energy_;
  double harvested = 0.0;
  const auto last = static_cast<Eigen::Index>(cfg_.N) - 1;
  for (Eigen::Index n = 0; n <= last; ++n) {
    const auto s = x.segment<kVarsPerSlot>(kVarsPerSlot * n);
    const double v2 = s[2] * s[2] + s[3] * s[3];
    const double a2 = s[4] * s[4] + s[5] * s[5];
    const double tau = s[7];
    consumed += dt * (cfg_.c1 * std::pow(v2 + eps2, 1.5) + cfg_.c2 / tau + k * a2 / tau);
    harvested += tangents_[static_cast<std::size_t>(n)](s[6]);
  }
  const Vec2 v_first(x[2], x[3]);
  const Vec2 v_last(x[kVarsPerSlot * last + 2], x[kVarsPerSlot * last + 3]);
  consumed += 0.5 * cfg_.m *
              (v_last.squaredNorm() - speed_sq_lower_bound(v_first, iterate_.traj.vel(0)));
  return consumed - harvested;
}

double ConvexSubproblem::equality_residual(const Eigen::VectorXd& x) const {
  const double dt = cfg_.dt();
  double worst = 0.0;
  const auto n_slots = static_cast<Eigen::Index>(cfg_.N);
  for (Eigen::Index n = 0; n + 1 < n_slots; ++n) {
    const auto s = x.segment<kVarsPerSlot>(kVarsPerSlot * n);
    const auto t = x.segment<kVarsPerSlot>(kVarsPerSlot * (n + 1));
    for (int c = 0; c < 2; ++c) {
      worst = std::max(worst, std::abs(t[2 + c] - s[2 + c] - dt * s[4 + c]));
      worst = std::max(worst,
                       std::abs(t[c] - s[c] - dt * s[2 + c] - 0.5 * dt * dt * s[4 + c]));
    }
  }
  const auto last = kVarsPerSlot * (n_slots - 1);
  if (cfg_.periodic_velocity) {
    for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(x[last + 2 + c] - x[2 + c]));
  }
  if (cfg_.pin_start) {
    for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(x[c] - iterate_.traj.q(0, c)));
  }
  return worst;
}

Eigen::VectorXd ConvexSubproblem::expansion_point() const {
  return pack(iterate_.traj, iterate_.zeta, iterate_.tau);
}

ConvexSubproblem build_subproblem(const ScpIterate& iterate, const PowerProfile& pw,
                                  const ScenarioConfig& cfg, SubproblemOptions options) {
  cfg.validate();
  const auto& traj = iterate.traj;
  if (traj.size() != cfg.N) {
    throw InputError("iterate has " + std::to_string(traj.size()) + " slots, config N = " +
                     std::to_string(cfg.N));
  }
  check_power(pw, cfg.N);
  check_kinematics(traj, cfg.dt(), 1e-6);
  check_limits(traj, cfg, 1e-9);
  if (iterate.zeta.size() != static_cast<Eigen::Index>(cfg.N) ||
      iterate.tau.size() != static_cast<Eigen::Index>(cfg.N)) {
    throw InputError("iterate slack arrays have the wrong length");
  }
  for (std::size_t n = 0; n < cfg.N; ++n) {
    const auto k = static_cast<Eigen::Index>(n);
    if (iterate.zeta[k] < cfg.H * cfg.H) {
      throw InputError("iterate zeta below H^2 at slot " + std::to_string(n + 1));
    }
    if (iterate.tau[k] < cfg.V_min * (1 - 1e-12)) {
      throw InputError("iterate tau below V_min at slot " + std::to_string(n + 1));
    }
  }
  if (!(options.trust_radius > 0.0)) throw InputError("trust radius must be positive");
  return ConvexSubproblem(iterate, pw, cfg, options);
}

// ---------------------------------------------------------------------------
// Interior-point solver
// ---------------------------------------------------------------------------

namespace {

// The solver works on a reduced layout. zeta is eliminated: the harvest
// tangent is decreasing in zeta, so every optimum has zeta on its lower bound
// and the tangent becomes a convex quadratic in q. The energy balance is split
// into per-slot epigraph rows e_n(y_n) <= w_n and one linear budget row
// sum w_n + K <= 0, which keeps the curvature local to each slot.
constexpr int kNr = 8;  // qx, qy, vx, vy, ax, ay, tau, w
constexpr int kTau = 6;
constexpr int kW = 7;
constexpr int kEpigraph = kSlotConstraints;   // extra slot row
constexpr int kRows = kSlotConstraints + 1;   // including the inert kZetaBound
constexpr int kIneqPerSlot = kRows - 1;
using Mat8 = Eigen::Matrix<double, kNr, kNr>;
using Vec8 = Eigen::Matrix<double, kNr, 1>;
using SpMat = Eigen::SparseMatrix<double>;
using SparseLu = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

int ineq_row(int j) { return j < kZetaBound ? j : j - 1; }

struct NewtonSystem {
  std::vector<Mat8> blocks;
  Eigen::VectorXd rhs;  // right-hand side of the stationarity rows
  // Optional bordered budget row: border^T dy + border_diag * dlam = border_rhs.
  Eigen::VectorXd border;
  double border_diag = 0.0;
  double border_rhs = 0.0;
  bool bordered = false;
};

struct NewtonStep {
  Eigen::VectorXd dy;
  double dlam_budget = 0.0;
  Eigen::VectorXd dnu;
};

// Raised inside the solver; converted to SubproblemFailure with the iterate.
struct Stall {
  std::string why;
};

class InteriorPointSolver {
 public:
  InteriorPointSolver(const ConvexSubproblem& sp, const SolverOptions& opt);

  SubproblemSolution run();

 private:
  Eigen::VectorXd expand(const Eigen::VectorXd& y) const;
  void build_equalities();
  double slot_energy(Eigen::Index n, const Vec8& s, Vec8* grad, Mat8* hess) const;
  void slot_rows(Eigen::Index n, const Vec8& s, double* vals, Vec8* grads) const;
  void add_row_hessian(Eigen::Index n, const Vec8& s, int row, double scale, Mat8& h) const;
  bool slot_rows_strict(const Eigen::VectorXd& y, bool with_epigraph) const;
  double f0(const Eigen::VectorXd& y) const { return -sp_.objective(expand(y)); }
  double energy(const Eigen::VectorXd& y) const;
  double budget_row(const Eigen::VectorXd& y) const;
  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& y) const;
  Eigen::VectorXd inequality_values(const Eigen::VectorXd& y) const;
  bool equality_ok(const Eigen::VectorXd& y) const {
    return (A_ * y - b_).lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + b_.lpNorm<Eigen::Infinity>());
  }
  bool solve_newton(const NewtonSystem& sys, const Eigen::VectorXd& rp, NewtonStep& step);
  Eigen::VectorXd interior_start() const;
  void spread_budget(Eigen::VectorXd& y) const;

  double phase1_value(const Eigen::VectorXd& y, double t) const;
  bool phase1(Eigen::VectorXd& y, double target, int& budget, int& used);

  struct Residual {
    Eigen::VectorXd dual;
    Eigen::VectorXd cent;
    Eigen::VectorXd prim;
  };
  Residual residual(const Eigen::VectorXd& y, const Eigen::VectorXd& f, const Eigen::VectorXd& lam,
                    const Eigen::VectorXd& nu, double mu) const;
  void primal_dual(Eigen::VectorXd& y, int& budget, int& used, SubproblemSolution& result,
                   double& kkt);

  const ConvexSubproblem& sp_;
  const ScenarioConfig& cfg_;
  SolverOptions opt_;
  Eigen::Index n_;
  double budget_constant_ = 0.0;  // K in sum w_n + K <= 0
  SpMat A_;
  Eigen::VectorXd b_;
  std::vector<Eigen::Triplet<double>> a_triplets_;
  SparseLu lu_plain_;
  SparseLu lu_bordered_;
  bool plain_analyzed_ = false;
  bool bordered_analyzed_ = false;
};

InteriorPointSolver::InteriorPointSolver(const ConvexSubproblem& sp, const SolverOptions& opt)
    : sp_(sp), cfg_(sp.config()), opt_(opt), n_(static_cast<Eigen::Index>(cfg_.N)) {
  const auto& tangents = sp_.harvest_tangents();
  budget_constant_ = sp_.comm_energy();
  for (const auto& tg : tangents) {
    budget_constant_ -= tg.value + tg.slope * (cfg_.H * cfg_.H - tg.zeta_i);
  }
  budget_constant_ += 0.5 * cfg_.m * sp_.iterate().traj.vel(0).squaredNorm();
  build_equalities();
}

Eigen::VectorXd InteriorPointSolver::expand(const Eigen::VectorXd& y) const {
  constexpr int kFull = ConvexSubproblem::kVarsPerSlot;
  Eigen::VectorXd x(kFull * n_);
  for (Eigen::Index n = 0; n < n_; ++n) {
    const auto s = y.segment<kNr>(kNr * n);
    x.segment<6>(kFull * n) = s.head<6>();
    x[kFull * n + 6] = s[0] * s[0] + s[1] * s[1] + cfg_.H * cfg_.H;
    x[kFull * n + 7] = s[kTau];
  }
  return x;
}

void InteriorPointSolver::build_equalities() {
  const double dt = cfg_.dt();
  std::vector<double> rhs;
  Eigen::Index row = 0;
  auto add = [&](Eigen::Index r, Eigen::Index c, double v) { a_triplets_.emplace_back(r, c, v); };
  for (Eigen::Index n = 0; n + 1 < n_; ++n) {
    const Eigen::Index s = kNr * n;
    const Eigen::Index t = kNr * (n + 1);
    for (int c = 0; c < 2; ++c) {
      // v[n+1] - v[n] - dt a[n] = 0
      add(row, t + 2 + c, 1.0);
      add(row, s + 2 + c, -1.0);
      add(row, s + 4 + c, -dt);
      rhs.push_back(0.0);
      ++row;
      // q[n+1] - q[n] - dt v[n] - dt^2/2 a[n] = 0
      add(row, t + c, 1.0);
      add(row, s + c, -1.0);
      add(row, s + 2 + c, -dt);
      add(row, s + 4 + c, -0.5 * dt * dt);
      rhs.push_back(0.0);
      ++row;
    }
  }
  if (cfg_.periodic_velocity) {
    const Eigen::Index last = kNr * (n_ - 1);
    for (int c = 0; c < 2; ++c) {
      add(row, last + 2 + c, 1.0);
      add(row, 2 + c, -1.0);
      rhs.push_back(0.0);
      ++row;
    }
  }
  if (cfg_.pin_start) {
    for (int c = 0; c < 2; ++c) {
      add(row, c, 1.0);
      rhs.push_back(sp_.iterate().traj.q(0, c));
      ++row;
    }
  }
  A_.resize(row, kNr * n_);
  A_.setFromTriplets(a_triplets_.begin(), a_triplets_.end());
  b_ = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
}

// Slot share of the energy balance: propulsion, the q-dependent part of the
// harvest tangent, and the kinetic terms attached to the first and last slot.
double InteriorPointSolver::slot_energy(Eigen::Index n, const Vec8& s, Vec8* grad,
                                        Mat8* hess) const {
  const double dt = cfg_.dt();
  const double k = cfg_.c2 / (cfg_.g * cfg_.g);
  const double eps2 = sp_.options().smoothing * sp_.options().smoothing;
  const Vec2 q(s[0], s[1]);
  const Vec2 v(s[2], s[3]);
  const Vec2 a(s[4], s[5]);
  const double tau = s[kTau];
  const double a2 = a.squaredNorm();
  const double w = v.squaredNorm() + eps2;
  const double root = std::sqrt(w);
  // The harvest slope is negative, so -slope |q|^2 is convex.
  const double slope = sp_.harvest_tangents()[static_cast<std::size_t>(n)].slope;
  double value = dt * (cfg_.c1 * w * root + cfg_.c2 / tau + k * a2 / tau) - slope * q.squaredNorm();
  if (grad) {
    grad->setZero();
    grad->head<2>() = -2.0 * slope * q;
    grad->segment<2>(2) = dt * 3.0 * cfg_.c1 * root * v;
    grad->segment<2>(4) = dt * 2.0 * k / tau * a;
    (*grad)[kTau] = dt * (-cfg_.c2 / (tau * tau) - k * a2 / (tau * tau));
  }
  if (hess) {
    Mat8& h = *hess;
    h.block<2, 2>(0, 0) += -2.0 * slope * Eigen::Matrix2d::Identity();
    h.block<2, 2>(2, 2) +=
        dt * 3.0 * cfg_.c1 * (root * Eigen::Matrix2d::Identity() + v * v.transpose() / root);
    h.block<2, 2>(4, 4) += dt * (2.0 * k / tau) * Eigen::Matrix2d::Identity();
    const Vec2 cross = -dt * 2.0 * k / (tau * tau) * a;
    h.block<2, 1>(4, kTau) += cross;
    h.block<1, 2>(kTau, 4) += cross.transpose();
    h(kTau, kTau) += dt * (2.0 * cfg_.c2 + 2.0 * k * a2) / (tau * tau * tau);
  }
  if (cfg_.m > 0.0) {
    if (n == n_ - 1) {
      value += 0.5 * cfg_.m * v.squaredNorm();
      if (grad) grad->segment<2>(2) += cfg_.m * v;
      if (hess) hess->block<2, 2>(2, 2) += cfg_.m * Eigen::Matrix2d::Identity();
    }
    if (n == 0) {
      const Vec2 v1 = sp_.iterate().traj.vel(0);
      value -= cfg_.m * v1.dot(v);
      if (grad) grad->segment<2>(2) -= cfg_.m * v1;
    }
  }
  return value;
}

double InteriorPointSolver::energy(const Eigen::VectorXd& y) const {
  double total = budget_constant_;
  for (Eigen::Index n = 0; n < n_; ++n) {
    total += slot_energy(n, y.segment<kNr>(kNr * n), nullptr, nullptr);
  }
  return total;
}

double InteriorPointSolver::budget_row(const Eigen::VectorXd& y) const {
  double total = budget_constant_;
  for (Eigen::Index n = 0; n < n_; ++n) total += y[kNr * n + kW];
  return total;
}

void InteriorPointSolver::slot_rows(Eigen::Index n, const Vec8& s, double* vals,
                                    Vec8* grads) const {
  const auto& qi = sp_.iterate().traj.q;
  const Vec2 vi = sp_.iterate().traj.vel(static_cast<std::size_t>(n));
  const double rho = sp_.options().trust_radius;
  for (int j = 0; j < kRows; ++j) grads[j].setZero();

  vals[kAccelCap] = s[4] * s[4] + s[5] * s[5] - cfg_.a_max * cfg_.a_max;
  grads[kAccelCap][4] = 2 * s[4];
  grads[kAccelCap][5] = 2 * s[5];

  vals[kSpeedCap] = s[2] * s[2] + s[3] * s[3] - cfg_.V_max * cfg_.V_max;
  grads[kSpeedCap][2] = 2 * s[2];
  grads[kSpeedCap][3] = 2 * s[3];

  vals[kZetaBound] = -1.0;

  vals[kTauBound] = s[kTau] * s[kTau] - speed_sq_lower_bound(Vec2(s[2], s[3]), vi);
  grads[kTauBound][2] = -2 * vi.x();
  grads[kTauBound][3] = -2 * vi.y();
  grads[kTauBound][kTau] = 2 * s[kTau];

  vals[kTauFloor] = cfg_.V_min - s[kTau];
  grads[kTauFloor][kTau] = -1.0;

  const double dx = s[0] - qi(n, 0);
  const double dy = s[1] - qi(n, 1);
  vals[kTrustXHi] = dx - rho;
  grads[kTrustXHi][0] = 1.0;
  vals[kTrustXLo] = -dx - rho;
  grads[kTrustXLo][0] = -1.0;
  vals[kTrustYHi] = dy - rho;
  grads[kTrustYHi][1] = 1.0;
  vals[kTrustYLo] = -dy - rho;
  grads[kTrustYLo][1] = -1.0;

  vals[kEpigraph] = slot_energy(n, s, &grads[kEpigraph], nullptr) - s[kW];
  grads[kEpigraph][kW] = -1.0;
}

void InteriorPointSolver::add_row_hessian(Eigen::Index n, const Vec8& s, int row, double scale,
                                          Mat8& h) const {
  switch (row) {
    case kAccelCap: h(4, 4) += 2 * scale; h(5, 5) += 2 * scale; break;
    case kSpeedCap: h(2, 2) += 2 * scale; h(3, 3) += 2 * scale; break;
    case kTauBound: h(kTau, kTau) += 2 * scale; break;
    case kEpigraph: {
      Mat8 e = Mat8::Zero();
      slot_energy(n, s, nullptr, &e);
      h += scale * e;
      break;
    }
    default: break;
  }
}

bool InteriorPointSolver::slot_rows_strict(const Eigen::VectorXd& y, bool with_epigraph) const {
  double vals[kRows];
  Vec8 grads[kRows];
  for (Eigen::Index n = 0; n < n_; ++n) {
    const Vec8 s = y.segment<kNr>(kNr * n);
    if (!(s[kTau] > 0.0)) return false;
    slot_rows(n, s, vals, grads);
    for (int j = 0; j < kRows; ++j) {
      if (j == kEpigraph && !with_epigraph) continue;
      if (!(vals[j] < 0.0)) return false;
    }
  }
  return true;
}

Eigen::VectorXd InteriorPointSolver::objective_gradient(const Eigen::VectorXd& y) const {
  const auto& rb = sp_.rate_bound();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(y.size());
  for (Eigen::Index n = 0; n < n_; ++n) {
    const Vec2 q(y[kNr * n], y[kNr * n + 1]);
    g.segment<2>(kNr * n) = 2.0 * cfg_.dt() * rb.beta[n] * (q - rb.mu);
  }
  return g;
}

Eigen::VectorXd InteriorPointSolver::inequality_values(const Eigen::VectorXd& y) const {
  Eigen::VectorXd f(kIneqPerSlot * n_ + 1);
  double vals[kRows];
  Vec8 grads[kRows];
  for (Eigen::Index n = 0; n < n_; ++n) {
    slot_rows(n, y.segment<kNr>(kNr * n), vals, grads);
    for (int j = 0; j < kRows; ++j) {
      if (j != kZetaBound) f[kIneqPerSlot * n + ineq_row(j)] = vals[j];
    }
  }
  f[kIneqPerSlot * n_] = budget_row(y);
  return f;
}

bool InteriorPointSolver::solve_newton(const NewtonSystem& sys, const Eigen::VectorXd& rp,
                                       NewtonStep& step) {
  const Eigen::Index nv = kNr * n_;
  const Eigen::Index nb = sys.bordered ? 1 : 0;
  const Eigen::Index me = A_.rows();
  const Eigen::Index dim = nv + nb + me;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n_ * kNr * kNr + 2 * n_ * nb + 1) +
               2 * a_triplets_.size());
  for (Eigen::Index n = 0; n < n_; ++n) {
    const Mat8& h = sys.blocks[static_cast<std::size_t>(n)];
    for (int i = 0; i < kNr; ++i) {
      for (int j = 0; j < kNr; ++j) trip.emplace_back(kNr * n + i, kNr * n + j, h(i, j));
    }
  }
  if (sys.bordered) {
    // The budget row only touches the w entries.
    for (Eigen::Index n = 0; n < n_; ++n) {
      const Eigen::Index i = kNr * n + kW;
      trip.emplace_back(i, nv, sys.border[i]);
      trip.emplace_back(nv, i, sys.border[i]);
    }
    trip.emplace_back(nv, nv, sys.border_diag);
  }
  for (const auto& tr : a_triplets_) {
    trip.emplace_back(nv + nb + tr.row(), tr.col(), tr.value());
    trip.emplace_back(tr.col(), nv + nb + tr.row(), tr.value());
  }
  SpMat K(dim, dim);
  K.setFromTriplets(trip.begin(), trip.end());
  SparseLu& lu = sys.bordered ? lu_bordered_ : lu_plain_;
  bool& analyzed = sys.bordered ? bordered_analyzed_ : plain_analyzed_;
  if (!analyzed) {
    lu.analyzePattern(K);
    analyzed = true;
  }
  lu.factorize(K);
  if (lu.info() != Eigen::Success) return false;

  Eigen::VectorXd rhs(dim);
  rhs.head(nv) = sys.rhs;
  if (sys.bordered) rhs[nv] = sys.border_rhs;
  rhs.tail(me) = -rp;
  const Eigen::VectorXd z = lu.solve(rhs);
  if (!z.allFinite()) return false;
  step.dy = z.head(nv);
  step.dlam_budget = sys.bordered ? z[nv] : 0.0;
  step.dnu = z.tail(me);
  return true;
}

Eigen::VectorXd InteriorPointSolver::interior_start() const {
  const auto& traj = sp_.iterate().traj;
  Eigen::VectorXd y(kNr * n_);
  for (Eigen::Index n = 0; n < n_; ++n) {
    const double speed = traj.v.row(n).norm();
    y.segment<kNr>(kNr * n) << traj.q(n, 0), traj.q(n, 1), traj.v(n, 0), traj.v(n, 1),
        traj.a(n, 0), traj.a(n, 1), speed - std::min(1e-4 * speed, 0.5 * (speed - cfg_.V_min)),
        0.0;
  }
  return y;
}

// Sets each w_n above its slot energy by an equal share of half the total
// slack, so both the epigraph rows and the budget row are strictly feasible.
// Barrier-optimal split: every epigraph row and the budget row get the same slack.
void InteriorPointSolver::spread_budget(Eigen::VectorXd& y) const {
  const double share = -energy(y) / static_cast<double>(n_ + 1);
  for (Eigen::Index n = 0; n < n_; ++n) {
    y[kNr * n + kW] = slot_energy(n, y.segment<kNr>(kNr * n), nullptr, nullptr) + share;
  }
}

double InteriorPointSolver::phase1_value(const Eigen::VectorXd& y, double t) const {
  double vals[kRows];
  Vec8 grads[kRows];
  double value = t * energy(y);
  for (Eigen::Index n = 0; n < n_; ++n) {
    slot_rows(n, y.segment<kNr>(kNr * n), vals, grads);
    for (int j = 0; j < kRows; ++j) {
      if (j != kZetaBound && j != kEpigraph) value -= std::log(-vals[j]);
    }
  }
  return value;
}

// Barrier minimization of the energy balance over the slot rows (w is idle)
// until the balance is below `target`.
bool InteriorPointSolver::phase1(Eigen::VectorXd& y, double target, int& budget, int& used) {
  constexpr double kArmijo = 0.01;
  double t = static_cast<double>(kIneqPerSlot * n_) / std::max(1.0, std::abs(energy(y)));
  double vals[kRows];
  Vec8 grads[kRows];
  for (int stage = 0; stage < 40; ++stage) {
    while (true) {
      if (energy(y) <= target && equality_ok(y)) return true;
      if (budget <= 0) return false;
      NewtonSystem sys;
      sys.blocks.assign(static_cast<std::size_t>(n_), Mat8::Zero());
      sys.rhs = Eigen::VectorXd::Zero(y.size());
      for (Eigen::Index n = 0; n < n_; ++n) {
        const Vec8 s = y.segment<kNr>(kNr * n);
        Mat8& h = sys.blocks[static_cast<std::size_t>(n)];
        Vec8 ge;
        Mat8 he = Mat8::Zero();
        slot_energy(n, s, &ge, &he);
        Vec8 g = t * ge;
        h += t * he;
        h(kW, kW) = 1.0;
        slot_rows(n, s, vals, grads);
        for (int j = 0; j < kRows; ++j) {
          if (j == kZetaBound || j == kEpigraph) continue;
          const double slack = -vals[j];
          g += grads[j] / slack;
          h.noalias() += grads[j] * grads[j].transpose() / (slack * slack);
          add_row_hessian(n, s, j, 1.0 / slack, h);
        }
        sys.rhs.segment<kNr>(kNr * n) = -g;
      }
      NewtonStep step;
      if (!solve_newton(sys, A_ * y - b_, step)) return false;
      --budget;
      ++used;
      const double slope = -sys.rhs.dot(step.dy);
      if (equality_ok(y) && -slope <= 2e-9) break;  // centred
      double s = 1.0;
      while (!slot_rows_strict(y + s * step.dy, false)) {
        s *= 0.5;
        if (s < 1e-14) return false;
      }
      if (equality_ok(y)) {
        const double f_now = phase1_value(y, t);
        while (phase1_value(y + s * step.dy, t) > f_now + kArmijo * s * slope) {
          s *= 0.5;
          if (s < 1e-14) return false;
        }
      }
      y += s * step.dy;
    }
    t *= opt_.barrier_growth;
  }
  return energy(y) < 0.0 && equality_ok(y);
}

InteriorPointSolver::Residual InteriorPointSolver::residual(const Eigen::VectorXd& y,
                                                            const Eigen::VectorXd& f,
                                                            const Eigen::VectorXd& lam,
                                                            const Eigen::VectorXd& nu,
                                                            double mu) const {
  Residual r;
  r.dual = objective_gradient(y) + A_.transpose() * nu;
  double vals[kRows];
  Vec8 grads[kRows];
  const Eigen::Index ib = kIneqPerSlot * n_;
  for (Eigen::Index n = 0; n < n_; ++n) {
    slot_rows(n, y.segment<kNr>(kNr * n), vals, grads);
    for (int j = 0; j < kRows; ++j) {
      if (j == kZetaBound) continue;
      r.dual.segment<kNr>(kNr * n) += lam[kIneqPerSlot * n + ineq_row(j)] * grads[j];
    }
    r.dual[kNr * n + kW] += lam[ib];
  }
  r.cent = -lam.cwiseProduct(f) - Eigen::VectorXd::Constant(lam.size(), mu);
  r.prim = A_ * y - b_;
  return r;
}

void InteriorPointSolver::primal_dual(Eigen::VectorXd& y, int& budget, int& used,
                                      SubproblemSolution& result, double& kkt) {
  constexpr double kFraction = 0.99;    // fraction-to-boundary factor
  constexpr double kArmijo = 1e-4;
  constexpr double kBeta = 0.5;
  constexpr double kBarrierTol = 10.0;  // barrier problem solved when error <= this * mu
  constexpr double kDualBand = 1e2;     // duals kept within this factor of mu / slack
  const Eigen::Index m = kIneqPerSlot * n_ + 1;
  const Eigen::Index ib = m - 1;
  const double dt = cfg_.dt();
  const auto& rb = sp_.rate_bound();
  const double prim_scale = 1.0 + b_.lpNorm<Eigen::Infinity>();

  Eigen::VectorXd f = inequality_values(y);
  double mu = std::max(1.0, std::abs(f0(y))) / static_cast<double>(m);
  Eigen::VectorXd lam = mu * (-f).cwiseInverse();
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(A_.rows());

  double vals[kRows];
  Vec8 grads[kRows];

  auto merit = [&](const Eigen::VectorXd& yy, const Eigen::VectorXd& ff, double penalty) {
    return f0(yy) - mu * (-ff).array().log().sum() + penalty * (A_ * yy - b_).lpNorm<1>();
  };

  int mu_updates = 0;
  while (true) {
    const Residual res = residual(y, f, lam, nu, mu);
    const double obj = f0(y);
    const double dual_err = res.dual.lpNorm<Eigen::Infinity>() /
                            (1.0 + objective_gradient(y).lpNorm<Eigen::Infinity>());
    const double prim_err = res.prim.lpNorm<Eigen::Infinity>() / prim_scale;
    const double gap = -f.dot(lam);
    kkt = std::max({dual_err, gap / (1.0 + std::abs(obj)), prim_err});
    log::debug("interior point step ", used, ": objective=", -obj, " mu=", mu, " kkt=", kkt);
    if (kkt <= opt_.tolerance) {
      result.kkt_history.push_back(kkt);
      result.stage_objectives.push_back(-obj);
      return;
    }

    const double barrier_err = std::max({dual_err, res.cent.lpNorm<Eigen::Infinity>(), prim_err});
    if (barrier_err <= kBarrierTol * mu && mu_updates < 200) {
      result.kkt_history.push_back(kkt);
      result.stage_objectives.push_back(-obj);
      const double floor = 0.1 * opt_.tolerance * (1.0 + std::abs(obj)) / static_cast<double>(m);
      mu = std::max(floor, std::min(0.2 * mu, std::pow(mu, 1.5)));
      ++mu_updates;
      continue;
    }
    if (budget <= 0) {
      std::ostringstream msg;
      msg << "Newton budget of " << opt_.max_newton << " exhausted (kkt " << kkt << ")";
      throw Stall{msg.str()};
    }

    // Slot rows are eliminated into the block Hessian; the budget row stays
    // as a bordered row.
    NewtonSystem sys;
    sys.rhs = -res.dual;
    sys.blocks.assign(static_cast<std::size_t>(n_), Mat8::Zero());
    for (Eigen::Index n = 0; n < n_; ++n) {
      const Vec8 s = y.segment<kNr>(kNr * n);
      Mat8& h = sys.blocks[static_cast<std::size_t>(n)];
      h.block<2, 2>(0, 0) += 2.0 * dt * rb.beta[n] * Eigen::Matrix2d::Identity();
      slot_rows(n, s, vals, grads);
      for (int j = 0; j < kRows; ++j) {
        if (j == kZetaBound) continue;
        const Eigen::Index i = kIneqPerSlot * n + ineq_row(j);
        add_row_hessian(n, s, j, lam[i], h);
        h.noalias() += (lam[i] / -vals[j]) * grads[j] * grads[j].transpose();
        sys.rhs.segment<kNr>(kNr * n) -= grads[j] * (res.cent[i] / vals[j]);
      }
    }
    sys.bordered = true;
    sys.border = Eigen::VectorXd::Zero(y.size());
    for (Eigen::Index n = 0; n < n_; ++n) sys.border[kNr * n + kW] = 1.0;
    sys.border_diag = f[ib] / lam[ib];
    sys.border_rhs = res.cent[ib] / lam[ib];

    NewtonStep dir;
    if (!solve_newton(sys, res.prim, dir)) throw Stall{"KKT factorization failed"};
    // res.dual already contains A^T nu, so the solve yields the step in nu.

    Eigen::VectorXd dlam(m);
    for (Eigen::Index n = 0; n < n_; ++n) {
      slot_rows(n, y.segment<kNr>(kNr * n), vals, grads);
      const Vec8 d = dir.dy.segment<kNr>(kNr * n);
      for (int j = 0; j < kRows; ++j) {
        if (j == kZetaBound) continue;
        const Eigen::Index i = kIneqPerSlot * n + ineq_row(j);
        dlam[i] = (-lam[i] * grads[j].dot(d) + res.cent[i]) / vals[j];
      }
    }
    dlam[ib] = dir.dlam_budget;

    double step_dual = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (dlam[i] < 0.0) step_dual = std::min(step_dual, -kFraction * lam[i] / dlam[i]);
    }

    // Primal fraction to boundary: no slack may shrink by more than kFraction.
    double step = 1.0;
    Eigen::VectorXd f_trial;
    auto admissible = [&](double s) {
      const Eigen::VectorXd trial = y + s * dir.dy;
      for (Eigen::Index n = 0; n < n_; ++n) {
        if (!(trial[kNr * n + kTau] > 0.0)) return false;
      }
      f_trial = inequality_values(trial);
      return (f_trial.array() <= (1.0 - kFraction) * f.array()).all();
    };
    while (!admissible(step)) {
      step *= kBeta;
      if (step < 1e-14) throw Stall{"primal step collapsed at the boundary"};
    }

    // Armijo on the barrier merit with an exact penalty on the equalities.
    Eigen::VectorXd barrier_grad = objective_gradient(y);
    for (Eigen::Index n = 0; n < n_; ++n) {
      slot_rows(n, y.segment<kNr>(kNr * n), vals, grads);
      for (int j = 0; j < kRows; ++j) {
        if (j != kZetaBound) barrier_grad.segment<kNr>(kNr * n) += grads[j] * (mu / -vals[j]);
      }
      barrier_grad[kNr * n + kW] += mu / -f[ib];
    }
    const double penalty = 1.1 * (nu + dir.dnu).lpNorm<Eigen::Infinity>() + 1.0;
    const double slope = barrier_grad.dot(dir.dy) - penalty * res.prim.lpNorm<1>();
    if (slope < 0.0) {
      const double phi0 = merit(y, f, penalty);
      // Merit changes below roundoff count as no increase; the equality
      // residual sum is only known to within its forward error bound.
      const double magnitude =
          (A_.cwiseAbs() * y.cwiseAbs()).sum() + b_.cwiseAbs().sum();
      const double noise = 10.0 * std::numeric_limits<double>::epsilon() *
                           (std::abs(phi0) + penalty * magnitude);
      while (merit(y + step * dir.dy, f_trial, penalty) > phi0 + kArmijo * step * slope + noise) {
        step *= kBeta;
        if (step < 1e-14) throw Stall{"interior point line search stalled"};
        f_trial = inequality_values(y + step * dir.dy);
      }
    }
    log::debug("   primal step ", step, " dual step ", step_dual, " budget slack ", -f_trial[ib]);
    y += step * dir.dy;
    nu += step * dir.dnu;
    lam += step_dual * dlam;
    // The objective ignores w, so re-split the slack exactly and put the
    // matching duals on their central value.
    spread_budget(y);
    f = inequality_values(y);
    for (Eigen::Index n = 0; n < n_; ++n) {
      const Eigen::Index i = kIneqPerSlot * n + ineq_row(kEpigraph);
      lam[i] = mu / -f[i];
    }
    lam[ib] = mu / -f[ib];
    for (Eigen::Index i = 0; i < m; ++i) {
      const double central = mu / -f[i];
      lam[i] = std::clamp(lam[i], central / kDualBand, central * kDualBand);
    }
    --budget;
    ++used;
  }
}

SubproblemSolution InteriorPointSolver::run() {
  int budget = opt_.max_newton;
  int used = 0;
  SubproblemSolution result;
  Eigen::VectorXd y = interior_start();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  auto fill = [&](double kkt) {
    result.x = expand(y);
    result.traj = sp_.unpack_trajectory(result.x);
    result.zeta = sp_.unpack_zeta(result.x);
    result.tau = sp_.unpack_tau(result.x);
    result.objective = sp_.objective(result.x);
    result.kkt_residual = kkt;
    result.newton_iterations = used;
  };
  auto fail = [&](const std::string& why, double kkt) {
    fill(kkt);
    return SubproblemFailure(why, result);
  };

  if (!slot_rows_strict(y, false)) {
    throw fail("expansion point is not strictly inside the slot constraints", kInf);
  }

  double harvest_scale = 0.0;
  for (const auto& tg : sp_.harvest_tangents()) harvest_scale += std::abs(tg.value);
  const double target = -1e-6 * std::max(1.0, harvest_scale);
  if (energy(y) > target || !equality_ok(y)) {
    const bool ok = phase1(y, target, budget, used);
    result.phase1_iterations = used;
    const double e = energy(y);
    if (!ok && (!(e < 0.0) || !equality_ok(y))) {
      std::ostringstream msg;
      msg << "no strictly feasible point: minimum energy balance " << e << " J";
      throw fail(msg.str(), kInf);
    }
  }
  spread_budget(y);

  double kkt = kInf;
  try {
    primal_dual(y, budget, used, result, kkt);
  } catch (const Stall& stall) {
    throw fail(stall.why, kkt);
  }
  fill(kkt);
  return result;
}

}  // namespace

SubproblemSolution solve(const ConvexSubproblem& sp, const SolverOptions& options) {
  InteriorPointSolver solver(sp, options);
  return solver.run();
}

}  // namespace laseruav
