#include "dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"
#include "tep.hpp"

namespace vardiss::dynamics {
namespace {

using EVector = Eigen::VectorXd;
using EMatrix = Eigen::MatrixXd;

EMatrix to_eigen(const ad::Matrix& m) {
  EMatrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(i, j);
  return out;
}

void check_accel(const SystemModel& model, std::span<const double> accel) {
  if (accel.size() != model.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "acceleration vector does not match the system dimension");
  }
}

std::string state_text(const State& s) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << s.t << " x=[";
  for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? "," : "") << s.x[i];
  os << "] v=[";
  for (std::size_t i = 0; i < s.v.size(); ++i) os << (i ? "," : "") << s.v[i];
  os << "]";
  return os.str();
}

// Right-hand side of the first-order system in y = (x, v, W) with W' = Q.
struct Derivative {
  Vector dy;
  Vector accel;
  double power = 0.0;
};

Derivative derivative(const SystemModel& model, double t, std::span<const double> y) {
  const std::size_t n = model.dim();
  State s{Vector(y.begin(), y.begin() + n), Vector(y.begin() + n, y.begin() + 2 * n), t};
  Derivative d;
  d.accel = solve_acceleration(model, s);
  d.power = ad::eval(model.dissipation(), s);
  d.dy.resize(2 * n + 1);
  std::copy(s.v.begin(), s.v.end(), d.dy.begin());
  std::copy(d.accel.begin(), d.accel.end(), d.dy.begin() + n);
  d.dy[2 * n] = d.power;
  return d;
}

Vector axpy(std::span<const double> y, double h, std::initializer_list<std::pair<double, const Vector*>> terms) {
  Vector out(y.begin(), y.end());
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

double smallest_mass_eigenvalue(const SystemModel& model, const State& s) {
  const EMatrix mass = to_eigen(ad::hess_vv(model.kinetic(), s));
  Eigen::SelfAdjointEigenSolver<EMatrix> eig(mass, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

bool all_finite(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

double max_abs(std::span<const double> y, std::size_t count) {
  double m = 0.0;
  for (std::size_t i = 0; i < count; ++i) m = std::max(m, std::abs(y[i]));
  return m;
}

// Errors that end a run early instead of propagating: a stage left the
// domain where the balance can be evaluated (non-finite state, singular Q).
bool mid_run_failure(const Error& e) {
  return e.kind() == ErrorKind::singular_dissipation || e.kind() == ErrorKind::invalid_argument;
}

class Recorder {
 public:
  Recorder(const SystemModel& model, Trajectory& traj) : model_(model), traj_(traj) {}

  void record(double t, std::span<const double> y, const Vector& accel, double power) {
    const std::size_t n = model_.dim();
    State s{Vector(y.begin(), y.begin() + n), Vector(y.begin() + n, y.begin() + 2 * n), t};
    traj_.energy.push_back(legendre_energy(model_, s));
    traj_.gibbs_rate.push_back(ad::time_partial(model_.gibbs(), s));
    traj_.times.push_back(t);
    traj_.states.push_back(std::move(s));
    traj_.accels.push_back(accel);
    traj_.diss_power.push_back(power);
    traj_.dissipated.push_back(y[2 * n]);
  }

 private:
  const SystemModel& model_;
  Trajectory& traj_;
};

}  // namespace

const char* to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::degenerate_mass: return "degenerate_mass";
    case RunStatus::stiffness: return "stiffness";
    case RunStatus::instability: return "instability";
  }
  return "unknown";
}

Vector variational_derivative_K(const ad::ScalarField& kinetic, const State& s, std::span<const double> accel) {
  if (accel.size() != s.v.size()) {
    throw Error(ErrorKind::dimension_mismatch, "acceleration vector does not match the number of rates");
  }
  const ad::Matrix mvv = ad::hess_vv(kinetic, s);
  const ad::Matrix mvx = ad::hess_vx(kinetic, s);
  Vector out = ad::grad_x(kinetic, s);
  for (double& o : out) o = -o;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < accel.size(); ++j) acc += mvv(i, j) * accel[j];
    for (std::size_t j = 0; j < s.x.size(); ++j) acc += mvx(i, j) * s.v[j];
    out[i] += acc;
  }
  return out;
}

ForceDecomposition residual(const SystemModel& model, const State& s, std::span<const double> accel) {
  model.check_state(s);
  check_accel(model, accel);
  ForceDecomposition f;
  f.d_k = variational_derivative_K(model.kinetic(), s, accel);
  f.grad_g = ad::grad_x(model.gibbs(), s);
  f.q = tep::dissipative_force(model.dissipation(), s).q;
  f.residual.resize(model.dim());
  for (std::size_t i = 0; i < model.dim(); ++i) f.residual[i] = f.d_k[i] + f.grad_g[i] + f.q[i];
  return f;
}

Vector solve_acceleration(const SystemModel& model, const State& s) {
  model.check_state(s);
  const std::size_t n = model.dim();
  const EMatrix mass = to_eigen(ad::hess_vv(model.kinetic(), s));

  Eigen::SelfAdjointEigenSolver<EMatrix> eig(mass, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > 0.0) || !(lo > kMassConditionFloor * hi)) {
    std::ostringstream os;
    os.precision(6);
    os << "mass matrix is singular or indefinite (eigenvalues in [" << lo << ", " << hi << "]) at " << state_text(s);
    throw DegenerateMassError(os.str(), s.x, s.v, s.t);
  }

  const EMatrix mvx = to_eigen(ad::hess_vx(model.kinetic(), s));
  const Vector gk = ad::grad_x(model.kinetic(), s);
  const Vector gg = ad::grad_x(model.gibbs(), s);
  const Vector q = tep::dissipative_force(model.dissipation(), s).q;
  const EVector v = Eigen::Map<const EVector>(s.v.data(), static_cast<Eigen::Index>(n));
  EVector rhs = Eigen::Map<const EVector>(gk.data(), static_cast<Eigen::Index>(n)) - mvx * v -
                Eigen::Map<const EVector>(gg.data(), static_cast<Eigen::Index>(n)) -
                Eigen::Map<const EVector>(q.data(), static_cast<Eigen::Index>(n));

  const EVector a = mass.ldlt().solve(rhs);
  const double defect = (mass * a - rhs).norm();
  if (!a.allFinite() || defect > 1e-10 * (1.0 + rhs.norm())) {
    throw DegenerateMassError("force balance could not be solved to tolerance at " + state_text(s), s.x, s.v, s.t);
  }
  return Vector(a.data(), a.data() + n);
}

double legendre_energy(const SystemModel& model, const State& s) {
  model.check_state(s);
  const Vector p = ad::grad_v(model.kinetic(), s);
  double e = ad::eval(model.gibbs(), s) - ad::eval(model.kinetic(), s);
  for (std::size_t i = 0; i < p.size(); ++i) e += s.v[i] * p[i];
  return e;
}

Trajectory integrate(const SystemModel& model, const State& s0, double t_end, const IntegratorOptions& options) {
  model.check_state(s0);
  if (!std::isfinite(t_end) || t_end < s0.t) throw Error(ErrorKind::invalid_argument, "t_end must be >= the initial time");
  if (!(options.dt > 0.0) || !std::isfinite(options.dt)) throw Error(ErrorKind::invalid_argument, "dt must be positive");
  if (options.stride == 0) throw Error(ErrorKind::invalid_argument, "stride must be at least 1");
  if (options.method == Method::rkf45 && (!(options.abs_tol > 0.0) || !(options.rel_tol >= 0.0))) {
    throw Error(ErrorKind::invalid_argument, "rkf45 needs abs_tol > 0 and rel_tol >= 0");
  }

  const std::size_t n = model.dim();
  Trajectory traj;
  Recorder rec(model, traj);

  Vector y(2 * n + 1, 0.0);
  std::copy(s0.x.begin(), s0.x.end(), y.begin());
  std::copy(s0.v.begin(), s0.v.end(), y.begin() + n);
  double t = s0.t;

  Derivative k1 = derivative(model, t, y);  // throws for an unsolvable initial state
  rec.record(t, y, k1.accel, k1.power);

  auto fail = [&](RunStatus status, const std::string& what) {
    traj.status = status;
    traj.message = what;
  };

  const double mass0 = smallest_mass_eigenvalue(model, s0);
  const double growth_cap = kGrowthLimit * std::max(1.0, max_abs(y, 2 * n));
  // Screens a candidate state before it is accepted; true means the run stops.
  auto rejects = [&](const Vector& next, double t_next) {
    const State s{Vector(next.begin(), next.begin() + n), Vector(next.begin() + n, next.begin() + 2 * n), t_next};
    if (max_abs(next, 2 * n) > growth_cap) {
      fail(RunStatus::instability, "state grew without bound at " + state_text(s));
      return true;
    }
    if (smallest_mass_eigenvalue(model, s) < kMassCollapseRatio * mass0) {
      fail(RunStatus::degenerate_mass, "mass matrix collapsed at " + state_text(s));
      return true;
    }
    return false;
  };

  if (options.method == Method::rk4) {
    const double span = t_end - s0.t;
    const auto steps = static_cast<std::size_t>(std::ceil(span / options.dt - 1e-9));
    const double h = steps > 0 ? span / static_cast<double>(steps) : 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      Vector next;
      Derivative d_next;
      try {
        const Derivative k2 = derivative(model, t + 0.5 * h, axpy(y, h, {{0.5, &k1.dy}}));
        const Derivative k3 = derivative(model, t + 0.5 * h, axpy(y, h, {{0.5, &k2.dy}}));
        const Derivative k4 = derivative(model, t + h, axpy(y, h, {{1.0, &k3.dy}}));
        next = axpy(y, h, {{1.0 / 6.0, &k1.dy}, {1.0 / 3.0, &k2.dy}, {1.0 / 3.0, &k3.dy}, {1.0 / 6.0, &k4.dy}});
        if (!all_finite(next)) {
          fail(RunStatus::instability, "state became non-finite after t=" + std::to_string(t));
          break;
        }
        if (rejects(next, s0.t + static_cast<double>(k + 1) * h)) break;
        d_next = derivative(model, s0.t + static_cast<double>(k + 1) * h, next);
      } catch (const DegenerateMassError& e) {
        fail(RunStatus::degenerate_mass, e.what());
        break;
      } catch (const Error& e) {
        if (!mid_run_failure(e)) throw;
        fail(RunStatus::instability, e.what());
        break;
      }
      y = std::move(next);
      k1 = std::move(d_next);
      t = s0.t + static_cast<double>(k + 1) * h;
      ++traj.steps;
      if ((k + 1) % options.stride == 0 || k + 1 == steps) rec.record(t, y, k1.accel, k1.power);
    }
  } else {
    // Fehlberg 4(5); the fourth-order solution is propagated.
    static constexpr double c2 = 1.0 / 4, c3 = 3.0 / 8, c4 = 12.0 / 13, c6 = 1.0 / 2;
    static constexpr double a21 = 1.0 / 4;
    static constexpr double a31 = 3.0 / 32, a32 = 9.0 / 32;
    static constexpr double a41 = 1932.0 / 2197, a42 = -7200.0 / 2197, a43 = 7296.0 / 2197;
    static constexpr double a51 = 439.0 / 216, a52 = -8.0, a53 = 3680.0 / 513, a54 = -845.0 / 4104;
    static constexpr double a61 = -8.0 / 27, a62 = 2.0, a63 = -3544.0 / 2565, a64 = 1859.0 / 4104, a65 = -11.0 / 40;
    static constexpr double b41 = 25.0 / 216, b43 = 1408.0 / 2565, b44 = 2197.0 / 4104, b45 = -1.0 / 5;
    static constexpr double e1 = 16.0 / 135 - b41, e3 = 6656.0 / 12825 - b43, e4 = 28561.0 / 56430 - b44,
                            e5 = -9.0 / 50 - b45, e6 = 2.0 / 55;

    double h = std::min(options.dt, t_end - t);
    std::size_t accepted = 0;
    std::string last_stage_error;
    RunStatus last_stage_status = RunStatus::stiffness;
    while (t < t_end) {
      if (traj.steps + 1 > options.max_steps) {
        fail(RunStatus::stiffness, "step budget exhausted at t=" + std::to_string(t));
        break;
      }
      if (h < 1e-12 * std::max(1.0, std::abs(t))) {
        fail(last_stage_error.empty() ? RunStatus::stiffness : last_stage_status,
             "step size underflow at t=" + std::to_string(t) +
                 (last_stage_error.empty() ? std::string() : ": " + last_stage_error));
        break;
      }
      const bool last = t + h >= t_end;
      if (last) h = t_end - t;
      Vector y4;
      double err = 0.0;
      bool stage_ok = true;
      try {
        const Derivative k2 = derivative(model, t + c2 * h, axpy(y, h, {{a21, &k1.dy}}));
        const Derivative k3 = derivative(model, t + c3 * h, axpy(y, h, {{a31, &k1.dy}, {a32, &k2.dy}}));
        const Derivative k4 =
            derivative(model, t + c4 * h, axpy(y, h, {{a41, &k1.dy}, {a42, &k2.dy}, {a43, &k3.dy}}));
        const Derivative k5 =
            derivative(model, t + h, axpy(y, h, {{a51, &k1.dy}, {a52, &k2.dy}, {a53, &k3.dy}, {a54, &k4.dy}}));
        const Derivative k6 = derivative(
            model, t + c6 * h, axpy(y, h, {{a61, &k1.dy}, {a62, &k2.dy}, {a63, &k3.dy}, {a64, &k4.dy}, {a65, &k5.dy}}));
        y4 = axpy(y, h, {{b41, &k1.dy}, {b43, &k3.dy}, {b44, &k4.dy}, {b45, &k5.dy}});
        const Vector diff =
            axpy(Vector(y.size(), 0.0), h, {{e1, &k1.dy}, {e3, &k3.dy}, {e4, &k4.dy}, {e5, &k5.dy}, {e6, &k6.dy}});
        err = max_abs(diff, 2 * n);
        if (!all_finite(y4) || !std::isfinite(err)) stage_ok = false;
      } catch (const DegenerateMassError& e) {
        stage_ok = false;
        last_stage_error = e.what();
        last_stage_status = RunStatus::degenerate_mass;
      } catch (const Error& e) {
        if (!mid_run_failure(e)) throw;
        stage_ok = false;
        last_stage_error = e.what();
        last_stage_status = RunStatus::instability;
      }
      if (!stage_ok) {
        h *= 0.25;
        continue;
      }
      const double tol = options.abs_tol + options.rel_tol * std::max(max_abs(y, 2 * n), max_abs(y4, 2 * n));
      if (err <= tol) {
        Derivative d_next;
        const double t_next = last ? t_end : t + h;
        try {
          d_next = derivative(model, t_next, y4);
        } catch (const DegenerateMassError& e) {
          stage_ok = false;
          last_stage_error = e.what();
          last_stage_status = RunStatus::degenerate_mass;
        } catch (const Error& e) {
          if (!mid_run_failure(e)) throw;
          stage_ok = false;
          last_stage_error = e.what();
          last_stage_status = RunStatus::instability;
        }
        if (!stage_ok) {
          h *= 0.25;
          continue;
        }
        if (rejects(y4, t_next)) break;
        last_stage_error.clear();
        t = t_next;
        y = std::move(y4);
        k1 = std::move(d_next);
        ++traj.steps;
        ++accepted;
        if (accepted % options.stride == 0 || t >= t_end) rec.record(t, y, k1.accel, k1.power);
        const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
      } else {
        h *= std::clamp(0.9 * std::pow(tol / err, 0.25), 0.1, 0.5);
      }
    }
  }

  // Balance defect |dE + int (Q - dG/dt) dt| / dt over neighbouring samples.
  const std::size_t m = traj.size();
  traj.balance_defect.assign(m, 0.0);
  auto source = [&](std::size_t k) { return traj.diss_power[k] - traj.gibbs_rate[k]; };
  for (std::size_t k = 0; k < m && m > 1; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == m ? k : k + 1;
    double work = 0.0;
    for (std::size_t j = lo; j < hi; ++j) work += 0.5 * (traj.times[j + 1] - traj.times[j]) * (source(j) + source(j + 1));
    const double dt = traj.times[hi] - traj.times[lo];
    traj.balance_defect[k] = dt > 0.0 ? std::abs(traj.energy[hi] - traj.energy[lo] + work) / dt : 0.0;
  }
  return traj;
}

}  // namespace vardiss::dynamics
