#pragma once

// Equations of motion from the potential triple (K, G, Q):
//
//   D_K + dG/dx + q = 0,   D_K = d/dt dK/dv - dK/dx,
//
// with q the dissipative force of Q. Because q does not depend on the
// accelerations, the balance is linear in them and one symmetric solve per
// evaluation suffices.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "model.hpp"
#include "state.hpp"

namespace vardiss::dynamics {

using ad::Vector;
using model::SystemModel;

struct ForceDecomposition {
  Vector d_k;       ///< variational derivative of K
  Vector grad_g;    ///< dG/dx
  Vector q;         ///< dissipative force
  Vector residual;  ///< d_k + grad_g + q
};

/// hess_vv(K) a + hess_vx(K) v - grad_x(K)
Vector variational_derivative_K(const ad::ScalarField& kinetic, const State& s, std::span<const double> accel);

ForceDecomposition residual(const SystemModel& model, const State& s, std::span<const double> accel);

/// Accelerations satisfying the force balance at s. Throws DegenerateMassError
/// when hess_vv(K) is not safely positive definite (smallest eigenvalue below
/// kMassConditionFloor times the largest).
Vector solve_acceleration(const SystemModel& model, const State& s);

inline constexpr double kMassConditionFloor = 1e-10;

/// A run stops with degenerate_mass once the smallest mass eigenvalue drops
/// below this fraction of its value at the initial state.
inline constexpr double kMassCollapseRatio = 1e-6;

/// A run stops with instability once max |x|, |v| exceeds this multiple of
/// max(1, initial max |x|, |v|).
inline constexpr double kGrowthLimit = 1e8;

/// E = v . dK/dv - K + G
double legendre_energy(const SystemModel& model, const State& s);

enum class Method { rk4, rkf45 };

struct IntegratorOptions {
  Method method = Method::rk4;
  double dt = 1e-3;  ///< fixed step for rk4, initial step for rkf45
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  std::size_t stride = 1;  ///< record every stride-th accepted step (and the last)
  std::size_t max_steps = 50'000'000;
};

enum class RunStatus { completed, degenerate_mass, stiffness, instability };

const char* to_string(RunStatus status) noexcept;

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Vector> accels;
  std::vector<double> energy;          ///< Legendre energy
  std::vector<double> diss_power;      ///< Q along the path
  std::vector<double> dissipated;      ///< integral of Q, integrated with the state
  std::vector<double> gibbs_rate;      ///< explicit dG/dt
  std::vector<double> balance_defect;  ///< |dE/dt + Q - dG/dt| by differencing

  RunStatus status = RunStatus::completed;
  std::string message;  ///< failure description; last entry of `states` is the last valid state
  std::size_t steps = 0;

  bool ok() const noexcept { return status == RunStatus::completed; }
  std::size_t size() const noexcept { return times.size(); }
};

/// Integrates from s0 to t_end. Throws on invalid input or when s0 itself
/// cannot be solved; failures after the first step truncate the trajectory
/// and set `status`.
Trajectory integrate(const SystemModel& model, const State& s0, double t_end, const IntegratorOptions& options = {});

}  // namespace vardiss::dynamics
