#pragma once

// One-dimensional method-of-lines model of a viscous (Norton-Hoff) bar whose
// density depends on the volumetric strain. No stored elastic energy: the
// only forces are the viscous stress and the inertial terms generated by the
// strain-dependent density,
//
//   d(sigma)/dx = rho(eps) u_tt + rho'(eps) eps_t u_t + 1/2 d/dx (u_t^2 rho'(eps)).
//
// Boundaries are fixed (u = u_t = 0 at both ends).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vardiss::continuum {

enum class DensityLaw { linear, exponential };

const char* to_string(DensityLaw law) noexcept;
DensityLaw parse_density_law(const std::string& name);

struct BarConfig {
  std::size_t nodes = 0;
  double length = 0.0;  ///< m
  DensityLaw law = DensityLaw::linear;
  double rho0 = 0.0;    ///< kg/m^3
  double beta = 0.0;    ///< dimensionless density sensitivity
  double alpha = 0.0;   ///< Norton-Hoff modulus
  double m_exp = 2.0;   ///< Norton-Hoff exponent, > 1
  double delta = 1e-8;  ///< strain-rate regularization

  /// Throws Error(invalid_argument) unless nodes >= 3, length > 0, rho0 > 0,
  /// alpha > 0, m_exp > 1 and delta >= 0 (all finite).
  void validate() const;
  double dx() const noexcept { return length / static_cast<double>(nodes - 1); }

  template <class S>
  S density(const S& eps) const {
    using std::exp;
    if (law == DensityLaw::linear) return S(rho0) * (S(1.0) + S(beta) * eps);
    return S(rho0) * exp(S(beta) * eps);
  }
  template <class S>
  S density_slope(const S& eps) const {
    using std::exp;
    if (law == DensityLaw::linear) return S(rho0 * beta);
    return S(rho0 * beta) * exp(S(beta) * eps);
  }
};

struct BarState {
  std::vector<double> u;  ///< nodal displacement, m
  std::vector<double> w;  ///< nodal velocity, m/s
  double t = 0.0;
};

/// First derivative on the uniform grid: second-order central differences
/// inside, one-sided second-order four-point closures at both ends (three-point
/// when nodes == 3).
std::vector<double> derivative(std::span<const double> f, double dx);

/// Nodal strain du/dx.
inline std::vector<double> strain(std::span<const double> u, double dx) { return derivative(u, dx); }

/// Regularized Norton-Hoff stress alpha (r^2 + delta^2)^((m-2)/2) r.
double stress(double rate, const BarConfig& cfg);
std::vector<double> stress(std::span<const double> rate, const BarConfig& cfg);

/// The individual pieces of the nodal momentum balance. Boundary entries of
/// `accel` are zero.
struct MomentumTerms {
  std::vector<double> density;
  std::vector<double> div_stress;     ///< d(sigma)/dx
  std::vector<double> rate_term;      ///< rho'(eps) eps_t w
  std::vector<double> gradient_term;  ///< 1/2 d/dx (w^2 rho'(eps))
  std::vector<double> accel;
};

/// Throws DensityCollapseError when rho <= 0 at some node.
MomentumTerms momentum_terms(const BarState& s, const BarConfig& cfg);
std::vector<double> momentum_rhs(const BarState& s, const BarConfig& cfg);

/// Euler-Lagrange residual of the discrete Lagrangian
///   L = sum_cells dx rho(eps_c) (w_l^2 + w_r^2) / 4 - sum_cells dx sigma_c eps_c
/// (cell strains, lumped nodal velocities, cell stresses frozen), per unit
/// length at every node; zero at the fixed ends. It is obtained by
/// differentiating the Lagrangian on three-node patches, independent of the
/// nodal stencils used by momentum_rhs.
std::vector<double> discrete_lagrangian_residual(const BarState& s, std::span<const double> accel,
                                                 const BarConfig& cfg);

/// Trapezoidal nodal quadratures over the bar.
double total_mass(std::span<const double> u, const BarConfig& cfg);
double mass_exchange_rate(std::span<const double> u, std::span<const double> w, const BarConfig& cfg);
double kinetic_energy(std::span<const double> u, std::span<const double> w, const BarConfig& cfg);
/// Integral of sigma * eps_t.
double dissipation_rate(std::span<const double> w, const BarConfig& cfg);

/// Largest step the explicit integrator accepts at s: half the rk4 stability
/// limit of the viscous (parabolic) operator, 0.5 * 2.78 dx^2 rho_min / alpha_t.
double stable_time_step(const BarState& s, const BarConfig& cfg);

/// Amplitude * sin(mode pi x / L) sampled at the nodes.
std::vector<double> sine_mode(const BarConfig& cfg, double amplitude, int mode = 1);

enum class BarStatus { completed, density_collapse, instability };

const char* to_string(BarStatus status) noexcept;

struct BarTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> u, w;
  std::vector<double> mass;
  std::vector<double> exchange_rate;
  std::vector<double> kinetic;
  std::vector<double> dissipation;  ///< dissipation rate
  std::vector<double> dissipated;   ///< time integral of the dissipation rate

  BarStatus status = BarStatus::completed;
  std::string message;
  std::size_t steps = 0;

  bool ok() const noexcept { return status == BarStatus::completed; }
  std::size_t size() const noexcept { return times.size(); }
};

/// Fixed-step rk4 over momentum_rhs. Rejects dt above stable_time_step(s0).
/// Density collapse or growth of the state norm beyond 1e6 times its initial
/// value stops the run with a truncated trajectory.
BarTrajectory integrate_bar(const BarState& s0, double t_end, const BarConfig& cfg, double dt, std::size_t stride = 1);

struct MassAudit {
  double max_defect = 0.0;   ///< max |dM - int R dt| / dt over consecutive samples
  double mass_drift = 0.0;   ///< max |M - M(0)|
  std::size_t samples = 0;
};

/// Recomputes M(t) and its exchange rate R(t) from the stored states and
/// compares differenced M with trapezoidal quadrature of R.
MassAudit mass_audit(const BarTrajectory& traj, const BarConfig& cfg);

}  // namespace vardiss::continuum
