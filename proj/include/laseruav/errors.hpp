#pragma once

#include <stdexcept>
#include <string>

namespace laseruav {

/// Base class for every error raised by the planner.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (config, CSV, array lengths).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A model equation was evaluated outside its domain, e.g. speed below V_min.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::size_t slot)
      : Error(what), slot_(slot) {}
  std::size_t slot() const { return slot_; }

 private:
  std::size_t slot_;
};

/// Circle/segment geometry cannot be realized (circles overlap the
/// connecting segment, zero-length transition with a speed change).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// The scenario admits no energy-feasible plan (net harvest <= 0,
/// horizon too short, consumption exceeds harvest).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// The convex subproblem solver did not reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double kkt_residual)
      : Error(what), kkt_residual_(kkt_residual) {}
  double kkt_residual() const { return kkt_residual_; }

 private:
  double kkt_residual_;
};

}  // namespace laseruav
