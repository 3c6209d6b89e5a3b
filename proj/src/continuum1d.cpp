#include "continuum1d.hpp"

#include <algorithm>
#include <numbers>

#include "autodiff.hpp"
#include "dynamics.hpp"
#include "error.hpp"

namespace vardiss::continuum {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::invalid_argument, what);
}

void check_sizes(const BarConfig& cfg, std::size_t a, std::size_t b) {
  if (a != cfg.nodes || b != cfg.nodes) {
    throw Error(ErrorKind::dimension_mismatch, "nodal arrays must have " + std::to_string(cfg.nodes) + " entries");
  }
}

double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

std::vector<double> densities(std::span<const double> eps, const BarConfig& cfg) {
  std::vector<double> rho(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    rho[i] = cfg.density(eps[i]);
    if (!(rho[i] > 0.0)) {
      throw DensityCollapseError("density is not positive (" + std::to_string(rho[i]) + ") at node " +
                                     std::to_string(i),
                                 i);
    }
  }
  return rho;
}

double tangent_viscosity(double rate, const BarConfig& cfg) {
  const double r2 = rate * rate + cfg.delta * cfg.delta;
  if (cfg.m_exp == 2.0) return cfg.alpha;
  return cfg.alpha * ((cfg.m_exp - 1.0) * rate * rate + cfg.delta * cfg.delta) * std::pow(r2, 0.5 * cfg.m_exp - 2.0);
}

}  // namespace

const char* to_string(DensityLaw law) noexcept { return law == DensityLaw::linear ? "linear" : "exponential"; }

DensityLaw parse_density_law(const std::string& name) {
  if (name == "linear") return DensityLaw::linear;
  if (name == "exponential") return DensityLaw::exponential;
  throw Error(ErrorKind::invalid_argument, "unknown density law '" + name + "' (expected linear or exponential)");
}

const char* to_string(BarStatus status) noexcept {
  switch (status) {
    case BarStatus::completed: return "completed";
    case BarStatus::density_collapse: return "density_collapse";
    case BarStatus::instability: return "instability";
  }
  return "unknown";
}

void BarConfig::validate() const {
  require(nodes >= 3, "bar needs at least 3 nodes");
  require(std::isfinite(length) && length > 0.0, "bar length must be positive");
  require(std::isfinite(rho0) && rho0 > 0.0, "rho0 must be positive");
  require(std::isfinite(beta), "beta must be finite");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
  require(std::isfinite(m_exp) && m_exp > 1.0, "Norton-Hoff exponent must exceed 1");
  require(std::isfinite(delta) && delta >= 0.0, "regularization delta must be nonnegative");
}

std::vector<double> derivative(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  require(n >= 3, "derivative needs at least 3 nodes");
  require(dx > 0.0, "grid spacing must be positive");
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  if (n >= 4) {
    // Leading error h^2/6 f''' equals that of the central stencil, so that a
    // second application of the operator stays second order next to the ends.
    d[0] = (-4.0 * f[0] + 7.0 * f[1] - 4.0 * f[2] + f[3]) / (2.0 * dx);
    d[n - 1] = (4.0 * f[n - 1] - 7.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (2.0 * dx);
  } else {
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
  }
  return d;
}

double stress(double rate, const BarConfig& cfg) {
  if (cfg.m_exp == 2.0) return cfg.alpha * rate;
  return cfg.alpha * std::pow(rate * rate + cfg.delta * cfg.delta, 0.5 * (cfg.m_exp - 2.0)) * rate;
}

std::vector<double> stress(std::span<const double> rate, const BarConfig& cfg) {
  std::vector<double> out(rate.size());
  std::transform(rate.begin(), rate.end(), out.begin(), [&](double r) { return stress(r, cfg); });
  return out;
}

MomentumTerms momentum_terms(const BarState& s, const BarConfig& cfg) {
  cfg.validate();
  check_sizes(cfg, s.u.size(), s.w.size());
  const std::size_t n = cfg.nodes;
  const double dx = cfg.dx();
  const auto eps = derivative(s.u, dx);
  const auto rate = derivative(s.w, dx);

  MomentumTerms t;
  t.density = densities(eps, cfg);
  t.div_stress = derivative(stress(rate, cfg), dx);
  std::vector<double> flux(n);
  t.rate_term.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double slope = cfg.density_slope(eps[i]);
    t.rate_term[i] = slope * rate[i] * s.w[i];
    flux[i] = s.w[i] * s.w[i] * slope;
  }
  t.gradient_term = derivative(flux, dx);
  for (double& g : t.gradient_term) g *= 0.5;
  t.accel.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    t.accel[i] = (t.div_stress[i] - t.rate_term[i] - t.gradient_term[i]) / t.density[i];
  }
  return t;
}

std::vector<double> momentum_rhs(const BarState& s, const BarConfig& cfg) { return momentum_terms(s, cfg).accel; }

std::vector<double> discrete_lagrangian_residual(const BarState& s, std::span<const double> accel,
                                                 const BarConfig& cfg) {
  cfg.validate();
  check_sizes(cfg, s.u.size(), s.w.size());
  check_sizes(cfg, accel.size(), accel.size());
  const std::size_t n = cfg.nodes;
  const double dx = cfg.dx();

  // Frozen cell stresses from the cell strain rates.
  std::vector<double> cell_stress(n - 1);
  for (std::size_t c = 0; c + 1 < n; ++c) cell_stress[c] = stress((s.w[c + 1] - s.w[c]) / dx, cfg);

  // Kinetic energy of the two cells around a node, over the patch (l, j, r).
  const ad::ScalarField patch_kinetic({3, 3, false}, [&cfg, dx](auto x, auto v, const auto&) {
    using S = typename decltype(x)::value_type;
    S k = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      const S eps = (x[c + 1] - x[c]) / S(dx);
      k += S(0.25 * dx) * cfg.density(eps) * (v[c] * v[c] + v[c + 1] * v[c + 1]);
    }
    return k;
  });

  std::vector<double> res(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t c : {j - 1, j}) {
      const double rho = cfg.density((s.u[c + 1] - s.u[c]) / dx);
      if (!(rho > 0.0)) {
        throw DensityCollapseError("cell density is not positive next to node " + std::to_string(j), j);
      }
    }
    const double left = cell_stress[j - 1];
    const double right = cell_stress[j];
    const ad::ScalarField patch_work({3, 0, false}, [left, right](auto x, auto, const auto&) {
      using S = typename decltype(x)::value_type;
      return S(left) * (x[1] - x[0]) + S(right) * (x[2] - x[1]);
    });
    const State patch{{s.u[j - 1], s.u[j], s.u[j + 1]}, {s.w[j - 1], s.w[j], s.w[j + 1]}, s.t};
    const std::vector<double> a{accel[j - 1], accel[j], accel[j + 1]};
    const auto d_k = dynamics::variational_derivative_K(patch_kinetic, patch, a);
    const auto d_w = ad::grad_x(patch_work, patch);
    res[j] = (d_k[1] + d_w[1]) / dx;
  }
  return res;
}

double total_mass(std::span<const double> u, const BarConfig& cfg) {
  cfg.validate();
  check_sizes(cfg, u.size(), u.size());
  const auto eps = derivative(u, cfg.dx());
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m += trapezoid_weight(i, u.size()) * cfg.density(eps[i]);
  return m * cfg.dx();
}

double mass_exchange_rate(std::span<const double> u, std::span<const double> w, const BarConfig& cfg) {
  cfg.validate();
  check_sizes(cfg, u.size(), w.size());
  const auto eps = derivative(u, cfg.dx());
  const auto rate = derivative(w, cfg.dx());
  double r = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) r += trapezoid_weight(i, u.size()) * cfg.density_slope(eps[i]) * rate[i];
  return r * cfg.dx();
}

double kinetic_energy(std::span<const double> u, std::span<const double> w, const BarConfig& cfg) {
  cfg.validate();
  check_sizes(cfg, u.size(), w.size());
  const auto eps = derivative(u, cfg.dx());
  double k = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) k += trapezoid_weight(i, u.size()) * cfg.density(eps[i]) * w[i] * w[i];
  return 0.5 * k * cfg.dx();
}

double dissipation_rate(std::span<const double> w, const BarConfig& cfg) {
  cfg.validate();
  check_sizes(cfg, w.size(), w.size());
  const auto rate = derivative(w, cfg.dx());
  double p = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) p += trapezoid_weight(i, w.size()) * stress(rate[i], cfg) * rate[i];
  return p * cfg.dx();
}

double stable_time_step(const BarState& s, const BarConfig& cfg) {
  cfg.validate();
  check_sizes(cfg, s.u.size(), s.w.size());
  const double dx = cfg.dx();
  const auto rho = densities(derivative(s.u, dx), cfg);
  const auto rate = derivative(s.w, dx);
  double visc = 0.0;
  for (double r : rate) visc = std::max(visc, tangent_viscosity(r, cfg));
  const double rho_min = *std::min_element(rho.begin(), rho.end());
  return 0.5 * 2.78 * dx * dx * rho_min / visc;
}

std::vector<double> sine_mode(const BarConfig& cfg, double amplitude, int mode) {
  cfg.validate();
  std::vector<double> f(cfg.nodes);
  const double dx = cfg.dx();
  for (std::size_t i = 0; i < cfg.nodes; ++i) {
    f[i] = amplitude * std::sin(mode * std::numbers::pi * static_cast<double>(i) * dx / cfg.length);
  }
  f.front() = 0.0;
  f.back() = 0.0;
  return f;
}

BarTrajectory integrate_bar(const BarState& s0, double t_end, const BarConfig& cfg, double dt, std::size_t stride) {
  cfg.validate();
  check_sizes(cfg, s0.u.size(), s0.w.size());
  const std::size_t n = cfg.nodes;
  require(std::isfinite(t_end) && t_end >= s0.t, "t_end must be >= the initial time");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  require(stride >= 1, "stride must be at least 1");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(s0.u[i]) && std::isfinite(s0.w[i]), "initial state has non-finite entries");
  }
  require(s0.u.front() == 0.0 && s0.u.back() == 0.0 && s0.w.front() == 0.0 && s0.w.back() == 0.0,
          "fixed ends require u = w = 0 at the boundary nodes");
  const double limit = stable_time_step(s0, cfg);
  if (dt > limit) {
    throw Error(ErrorKind::invalid_argument,
                "dt = " + std::to_string(dt) + " exceeds the stable step " + std::to_string(limit));
  }

  BarTrajectory traj;
  auto record = [&](double t, const std::vector<double>& u, const std::vector<double>& w, double dissipated) {
    traj.times.push_back(t);
    traj.u.push_back(u);
    traj.w.push_back(w);
    traj.mass.push_back(total_mass(u, cfg));
    traj.exchange_rate.push_back(mass_exchange_rate(u, w, cfg));
    traj.kinetic.push_back(kinetic_energy(u, w, cfg));
    traj.dissipation.push_back(dissipation_rate(w, cfg));
    traj.dissipated.push_back(dissipated);
  };

  // y = (u, w, dissipated energy)
  auto rhs = [&](double t, const std::vector<double>& y) {
    BarState s{std::vector<double>(y.begin(), y.begin() + n), std::vector<double>(y.begin() + n, y.begin() + 2 * n), t};
    std::vector<double> dy(2 * n + 1);
    const auto a = momentum_rhs(s, cfg);
    std::copy(s.w.begin(), s.w.end(), dy.begin());
    std::copy(a.begin(), a.end(), dy.begin() + n);
    dy[2 * n] = dissipation_rate(s.w, cfg);
    return dy;
  };
  auto combine = [](const std::vector<double>& y, double h, const std::vector<double>& k) {
    std::vector<double> out(y);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * k[i];
    return out;
  };
  auto norm_inf = [n](const std::vector<double>& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < 2 * n; ++i) m = std::max(m, std::abs(y[i]));
    return m;
  };

  std::vector<double> y(2 * n + 1, 0.0);
  std::copy(s0.u.begin(), s0.u.end(), y.begin());
  std::copy(s0.w.begin(), s0.w.end(), y.begin() + n);
  record(s0.t, s0.u, s0.w, 0.0);
  const double norm0 = std::max(norm_inf(y), 1e-300);

  const double span = t_end - s0.t;
  const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
  const double h = steps > 0 ? span / static_cast<double>(steps) : 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = s0.t + static_cast<double>(k) * h;
    std::vector<double> next;
    try {
      const auto k1 = rhs(t, y);
      const auto k2 = rhs(t + 0.5 * h, combine(y, 0.5 * h, k1));
      const auto k3 = rhs(t + 0.5 * h, combine(y, 0.5 * h, k2));
      const auto k4 = rhs(t + h, combine(y, h, k3));
      next = y;
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    } catch (const DensityCollapseError& e) {
      traj.status = BarStatus::density_collapse;
      traj.message = std::string(e.what()) + " during the step from t=" + std::to_string(t);
      break;
    }
    const double growth = norm_inf(next);
    if (!std::isfinite(growth) || !std::isfinite(next[2 * n]) || growth > 1e6 * norm0) {
      traj.status = BarStatus::instability;
      traj.message = "state norm grew beyond 1e6 times its initial value after t=" + std::to_string(t);
      break;
    }
    y = std::move(next);
    ++traj.steps;
    if ((k + 1) % stride == 0 || k + 1 == steps) {
      try {
        record(s0.t + static_cast<double>(k + 1) * h, std::vector<double>(y.begin(), y.begin() + n),
               std::vector<double>(y.begin() + n, y.begin() + 2 * n), y[2 * n]);
      } catch (const DensityCollapseError& e) {
        traj.status = BarStatus::density_collapse;
        traj.message = e.what();
        break;
      }
    }
  }
  return traj;
}

MassAudit mass_audit(const BarTrajectory& traj, const BarConfig& cfg) {
  require(traj.size() >= 3, "mass audit needs at least 3 samples");
  MassAudit audit;
  audit.samples = traj.size();
  std::vector<double> mass(traj.size()), rate(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    mass[k] = total_mass(traj.u[k], cfg);
    rate[k] = mass_exchange_rate(traj.u[k], traj.w[k], cfg);
    audit.mass_drift = std::max(audit.mass_drift, std::abs(mass[k] - mass[0]));
  }
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    const double defect = std::abs(mass[k + 1] - mass[k] - 0.5 * dt * (rate[k] + rate[k + 1])) / dt;
    audit.max_defect = std::max(audit.max_defect, defect);
  }
  return audit;
}

}  // namespace vardiss::continuum
