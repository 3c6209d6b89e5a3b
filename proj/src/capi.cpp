#include "vardiss/vardiss.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "continuum1d.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "io.hpp"
#include "model.hpp"
#include "tep.hpp"
#include "verify.hpp"

struct vd_system {
  vardiss::model::SystemModel model;
};

struct vd_trajectory {
  std::shared_ptr<const vardiss::model::SystemModel> model;
  vardiss::dynamics::Trajectory traj;
};

struct vd_bar {
  vardiss::continuum::BarConfig cfg;
};

struct vd_bar_trajectory {
  vardiss::continuum::BarConfig cfg;
  vardiss::continuum::BarTrajectory traj;
};

namespace {

using namespace vardiss;

thread_local std::string last_error;

vd_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return VD_ERR_INVALID_ARGUMENT;
    case ErrorKind::dimension_mismatch: return VD_ERR_DIMENSION_MISMATCH;
    case ErrorKind::singular_dissipation: return VD_ERR_SINGULAR_DISSIPATION;
    case ErrorKind::degenerate_mass: return VD_ERR_DEGENERATE_MASS;
    case ErrorKind::stiffness: return VD_ERR_STIFFNESS;
    case ErrorKind::instability: return VD_ERR_INSTABILITY;
    case ErrorKind::density_collapse: return VD_ERR_DENSITY_COLLAPSE;
    case ErrorKind::unknown_suite: return VD_ERR_UNKNOWN_SUITE;
  }
  return VD_ERR_INTERNAL;
}

vd_status fail(vd_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class F>
vd_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VD_ERR_INTERNAL, e.what());
  }
}

#define VD_REQUIRE(cond, msg) \
  if (!(cond)) return fail(VD_ERR_INVALID_ARGUMENT, msg)

State make_state(const vd_system* sys, const double* x, const double* v, double t) {
  const std::size_t n = sys->model.dim();
  return State{std::vector<double>(x, x + n), std::vector<double>(v, v + n), t};
}

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

vd_status write_file(const char* path, const auto& writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) return fail(VD_ERR_IO, std::string("cannot open '") + path + "' for writing");
  writer(os);
  os.flush();
  if (!os) return fail(VD_ERR_IO, std::string("failed writing '") + path + "'");
  return VD_OK;
}

vd_status copy_series(const std::vector<double>& src, double* out, size_t capacity) {
  VD_REQUIRE(out != nullptr || src.empty(), "output buffer is null");
  VD_REQUIRE(capacity >= src.size(), "output buffer too small");
  std::copy(src.begin(), src.end(), out);
  return VD_OK;
}

vd_run_status run_status(dynamics::RunStatus s) {
  switch (s) {
    case dynamics::RunStatus::completed: return VD_RUN_COMPLETED;
    case dynamics::RunStatus::degenerate_mass: return VD_RUN_DEGENERATE_MASS;
    case dynamics::RunStatus::stiffness: return VD_RUN_STIFFNESS;
    case dynamics::RunStatus::instability: return VD_RUN_INSTABILITY;
  }
  return VD_RUN_INSTABILITY;
}

vd_run_status run_status(continuum::BarStatus s) {
  switch (s) {
    case continuum::BarStatus::completed: return VD_RUN_COMPLETED;
    case continuum::BarStatus::density_collapse: return VD_RUN_DENSITY_COLLAPSE;
    case continuum::BarStatus::instability: return VD_RUN_INSTABILITY;
  }
  return VD_RUN_INSTABILITY;
}

}  // namespace

extern "C" {

const char* vd_version(void) { return VARDISS_VERSION; }
const char* vd_last_error(void) { return last_error.c_str(); }

const char* vd_status_name(vd_status status) {
  switch (status) {
    case VD_OK: return "ok";
    case VD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case VD_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case VD_ERR_SINGULAR_DISSIPATION: return "singular_dissipation";
    case VD_ERR_DEGENERATE_MASS: return "degenerate_mass";
    case VD_ERR_STIFFNESS: return "stiffness";
    case VD_ERR_INSTABILITY: return "instability";
    case VD_ERR_DENSITY_COLLAPSE: return "density_collapse";
    case VD_ERR_UNKNOWN_SUITE: return "unknown_suite";
    case VD_ERR_IO: return "io";
    case VD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* vd_run_status_name(vd_run_status status) {
  switch (status) {
    case VD_RUN_COMPLETED: return "completed";
    case VD_RUN_DEGENERATE_MASS: return "degenerate_mass";
    case VD_RUN_STIFFNESS: return "stiffness";
    case VD_RUN_INSTABILITY: return "instability";
    case VD_RUN_DENSITY_COLLAPSE: return "density_collapse";
  }
  return "unknown";
}

void vd_free_string(char* s) { std::free(s); }
uint64_t vd_default_seed(void) { return kDefaultSeed; }

size_t vd_builtin_count(void) { return model::builtin_ids().size(); }

const char* vd_builtin_id(size_t index) {
  static const auto ids = model::builtin_ids();
  return index < ids.size() ? ids[index].c_str() : nullptr;
}

vd_status vd_system_create_builtin(const char* id, const char* const* names, const double* values, size_t count,
                                   vd_system** out) {
  VD_REQUIRE(id && out, "id and out must not be null");
  VD_REQUIRE(count == 0 || (names && values), "parameter arrays must not be null");
  *out = nullptr;
  return guarded([&] {
    model::ParameterMap params;
    for (size_t i = 0; i < count; ++i) {
      VD_REQUIRE(names[i] != nullptr, "parameter name must not be null");
      if (!params.emplace(names[i], values[i]).second) {
        return fail(VD_ERR_INVALID_ARGUMENT, std::string("duplicate parameter '") + names[i] + "'");
      }
    }
    *out = new vd_system{model::build_builtin(id, params)};
    return VD_OK;
  });
}

void vd_system_free(vd_system* sys) { delete sys; }
size_t vd_system_dim(const vd_system* sys) { return sys ? sys->model.dim() : 0; }

const char* vd_system_label(const vd_system* sys, size_t index) {
  if (!sys || index >= sys->model.dim()) return nullptr;
  return sys->model.labels()[index].c_str();
}

const char* vd_system_id(const vd_system* sys) { return sys ? sys->model.id().c_str() : nullptr; }

vd_status vd_system_residual(const vd_system* sys, const double* x, const double* v, double t, const double* a,
                             double* residual) {
  VD_REQUIRE(sys && x && v && a && residual, "null argument");
  return guarded([&] {
    const State s = make_state(sys, x, v, t);
    sys->model.check_state(s);
    const auto f = dynamics::residual(sys->model, s, std::span<const double>(a, sys->model.dim()));
    std::copy(f.residual.begin(), f.residual.end(), residual);
    return VD_OK;
  });
}

vd_status vd_system_acceleration(const vd_system* sys, const double* x, const double* v, double t, double* a) {
  VD_REQUIRE(sys && x && v && a, "null argument");
  return guarded([&] {
    const auto acc = dynamics::solve_acceleration(sys->model, make_state(sys, x, v, t));
    std::copy(acc.begin(), acc.end(), a);
    return VD_OK;
  });
}

vd_status vd_system_dissipative_force(const vd_system* sys, const double* x, const double* v, double t, double* q,
                                      double* power) {
  VD_REQUIRE(sys && x && v && q, "null argument");
  return guarded([&] {
    const State s = make_state(sys, x, v, t);
    sys->model.check_state(s);
    const auto f = tep::dissipative_force(sys->model.dissipation(), s);
    std::copy(f.q.begin(), f.q.end(), q);
    if (power) *power = f.power;
    return VD_OK;
  });
}

vd_status vd_system_energy(const vd_system* sys, const double* x, const double* v, double t, double* energy) {
  VD_REQUIRE(sys && x && v && energy, "null argument");
  return guarded([&] {
    const State s = make_state(sys, x, v, t);
    sys->model.check_state(s);
    *energy = dynamics::legendre_energy(sys->model, s);
    return VD_OK;
  });
}

void vd_integrator_options_default(vd_integrator_options* options) {
  if (!options) return;
  const dynamics::IntegratorOptions d;
  options->method = VD_METHOD_RK4;
  options->dt = d.dt;
  options->abs_tol = d.abs_tol;
  options->rel_tol = d.rel_tol;
  options->stride = d.stride;
  options->max_steps = d.max_steps;
}

vd_status vd_integrate(const vd_system* sys, const double* x0, const double* v0, double t0, double t_end,
                       const vd_integrator_options* options, vd_trajectory** out) {
  VD_REQUIRE(sys && x0 && v0 && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    dynamics::IntegratorOptions opt;
    if (options) {
      VD_REQUIRE(options->method == VD_METHOD_RK4 || options->method == VD_METHOD_RKF45, "unknown method");
      opt.method = options->method == VD_METHOD_RK4 ? dynamics::Method::rk4 : dynamics::Method::rkf45;
      opt.dt = options->dt;
      opt.abs_tol = options->abs_tol;
      opt.rel_tol = options->rel_tol;
      opt.stride = options->stride;
      opt.max_steps = options->max_steps;
    }
    auto model = std::make_shared<const model::SystemModel>(sys->model);
    auto traj = dynamics::integrate(*model, make_state(sys, x0, v0, t0), t_end, opt);
    *out = new vd_trajectory{std::move(model), std::move(traj)};
    return VD_OK;
  });
}

void vd_trajectory_free(vd_trajectory* traj) { delete traj; }
size_t vd_trajectory_size(const vd_trajectory* traj) { return traj ? traj->traj.size() : 0; }
size_t vd_trajectory_dim(const vd_trajectory* traj) { return traj ? traj->model->dim() : 0; }

vd_run_status vd_trajectory_status(const vd_trajectory* traj) {
  return traj ? run_status(traj->traj.status) : VD_RUN_INSTABILITY;
}

const char* vd_trajectory_message(const vd_trajectory* traj) { return traj ? traj->traj.message.c_str() : ""; }

vd_status vd_trajectory_series(const vd_trajectory* traj, vd_series which, double* out, size_t capacity) {
  VD_REQUIRE(traj, "null trajectory");
  const auto& t = traj->traj;
  switch (which) {
    case VD_SERIES_TIME: return copy_series(t.times, out, capacity);
    case VD_SERIES_ENERGY: return copy_series(t.energy, out, capacity);
    case VD_SERIES_DISSIPATION_POWER: return copy_series(t.diss_power, out, capacity);
    case VD_SERIES_DISSIPATED_WORK: return copy_series(t.dissipated, out, capacity);
    case VD_SERIES_BALANCE_DEFECT: return copy_series(t.balance_defect, out, capacity);
  }
  return fail(VD_ERR_INVALID_ARGUMENT, "unknown series");
}

vd_status vd_trajectory_sample(const vd_trajectory* traj, size_t index, double* x, double* v, double* a) {
  VD_REQUIRE(traj, "null trajectory");
  VD_REQUIRE(index < traj->traj.size(), "sample index out of range");
  const auto& s = traj->traj.states[index];
  if (x) std::copy(s.x.begin(), s.x.end(), x);
  if (v) std::copy(s.v.begin(), s.v.end(), v);
  if (a) std::copy(traj->traj.accels[index].begin(), traj->traj.accels[index].end(), a);
  return VD_OK;
}

vd_status vd_trajectory_write_csv(const vd_trajectory* traj, const char* path) {
  VD_REQUIRE(traj && path, "null argument");
  return guarded([&] {
    return write_file(path, [&](std::ostream& os) { io::write_particle_csv(os, *traj->model, traj->traj); });
  });
}

vd_status vd_trajectory_diagnostics_json(const vd_trajectory* traj, char** json) {
  VD_REQUIRE(traj && json, "null argument");
  *json = nullptr;
  return guarded([&] {
    *json = duplicate(io::particle_diagnostics(*traj->model, traj->traj).dump(2));
    return VD_OK;
  });
}

vd_status vd_bar_create(const vd_bar_params* params, vd_bar** out) {
  VD_REQUIRE(params && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    VD_REQUIRE(params->law == VD_DENSITY_LINEAR || params->law == VD_DENSITY_EXPONENTIAL, "unknown density law");
    continuum::BarConfig cfg{params->nodes,
                             params->length,
                             params->law == VD_DENSITY_LINEAR ? continuum::DensityLaw::linear
                                                              : continuum::DensityLaw::exponential,
                             params->rho0,
                             params->beta,
                             params->alpha,
                             params->m_exp,
                             params->delta};
    cfg.validate();
    *out = new vd_bar{cfg};
    return VD_OK;
  });
}

void vd_bar_free(vd_bar* bar) { delete bar; }
size_t vd_bar_nodes(const vd_bar* bar) { return bar ? bar->cfg.nodes : 0; }

namespace {
continuum::BarState bar_state(const vd_bar* bar, const double* u, const double* w) {
  const std::size_t n = bar->cfg.nodes;
  return {std::vector<double>(u, u + n), std::vector<double>(w, w + n), 0.0};
}
}  // namespace

vd_status vd_bar_sine_mode(const vd_bar* bar, double amplitude, int mode, double* out) {
  VD_REQUIRE(bar && out, "null argument");
  return guarded([&] {
    const auto f = continuum::sine_mode(bar->cfg, amplitude, mode);
    std::copy(f.begin(), f.end(), out);
    return VD_OK;
  });
}

vd_status vd_bar_momentum_rhs(const vd_bar* bar, const double* u, const double* w, double* accel) {
  VD_REQUIRE(bar && u && w && accel, "null argument");
  return guarded([&] {
    const auto a = continuum::momentum_rhs(bar_state(bar, u, w), bar->cfg);
    std::copy(a.begin(), a.end(), accel);
    return VD_OK;
  });
}

vd_status vd_bar_lagrangian_residual(const vd_bar* bar, const double* u, const double* w, const double* accel,
                                     double* residual) {
  VD_REQUIRE(bar && u && w && accel && residual, "null argument");
  return guarded([&] {
    const auto r = continuum::discrete_lagrangian_residual(
        bar_state(bar, u, w), std::span<const double>(accel, bar->cfg.nodes), bar->cfg);
    std::copy(r.begin(), r.end(), residual);
    return VD_OK;
  });
}

vd_status vd_bar_stable_dt(const vd_bar* bar, const double* u, const double* w, double* dt) {
  VD_REQUIRE(bar && u && w && dt, "null argument");
  return guarded([&] {
    *dt = continuum::stable_time_step(bar_state(bar, u, w), bar->cfg);
    return VD_OK;
  });
}

vd_status vd_bar_total_mass(const vd_bar* bar, const double* u, double* mass) {
  VD_REQUIRE(bar && u && mass, "null argument");
  return guarded([&] {
    *mass = continuum::total_mass(std::span<const double>(u, bar->cfg.nodes), bar->cfg);
    return VD_OK;
  });
}

vd_status vd_bar_integrate(const vd_bar* bar, const double* u0, const double* w0, double t_end, double dt,
                           size_t stride, vd_bar_trajectory** out) {
  VD_REQUIRE(bar && u0 && w0 && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto traj = continuum::integrate_bar(bar_state(bar, u0, w0), t_end, bar->cfg, dt, stride);
    *out = new vd_bar_trajectory{bar->cfg, std::move(traj)};
    return VD_OK;
  });
}

void vd_bar_trajectory_free(vd_bar_trajectory* traj) { delete traj; }
size_t vd_bar_trajectory_size(const vd_bar_trajectory* traj) { return traj ? traj->traj.size() : 0; }

vd_run_status vd_bar_trajectory_status(const vd_bar_trajectory* traj) {
  return traj ? run_status(traj->traj.status) : VD_RUN_INSTABILITY;
}

const char* vd_bar_trajectory_message(const vd_bar_trajectory* traj) { return traj ? traj->traj.message.c_str() : ""; }

vd_status vd_bar_trajectory_series(const vd_bar_trajectory* traj, vd_bar_series which, double* out, size_t capacity) {
  VD_REQUIRE(traj, "null trajectory");
  const auto& t = traj->traj;
  switch (which) {
    case VD_BAR_SERIES_TIME: return copy_series(t.times, out, capacity);
    case VD_BAR_SERIES_MASS: return copy_series(t.mass, out, capacity);
    case VD_BAR_SERIES_MASS_EXCHANGE: return copy_series(t.exchange_rate, out, capacity);
    case VD_BAR_SERIES_KINETIC_ENERGY: return copy_series(t.kinetic, out, capacity);
    case VD_BAR_SERIES_DISSIPATION_RATE: return copy_series(t.dissipation, out, capacity);
    case VD_BAR_SERIES_DISSIPATED_ENERGY: return copy_series(t.dissipated, out, capacity);
  }
  return fail(VD_ERR_INVALID_ARGUMENT, "unknown series");
}

vd_status vd_bar_trajectory_sample(const vd_bar_trajectory* traj, size_t index, double* u, double* w) {
  VD_REQUIRE(traj, "null trajectory");
  VD_REQUIRE(index < traj->traj.size(), "sample index out of range");
  if (u) std::copy(traj->traj.u[index].begin(), traj->traj.u[index].end(), u);
  if (w) std::copy(traj->traj.w[index].begin(), traj->traj.w[index].end(), w);
  return VD_OK;
}

vd_status vd_bar_trajectory_write_csv(const vd_bar_trajectory* traj, const char* path) {
  VD_REQUIRE(traj && path, "null argument");
  return guarded([&] { return write_file(path, [&](std::ostream& os) { io::write_bar_csv(os, traj->traj); }); });
}

vd_status vd_bar_trajectory_diagnostics_json(const vd_bar_trajectory* traj, char** json) {
  VD_REQUIRE(traj && json, "null argument");
  *json = nullptr;
  return guarded([&] {
    *json = duplicate(io::bar_diagnostics(traj->cfg, traj->traj).dump(2));
    return VD_OK;
  });
}

size_t vd_verify_suite_count(void) { return verify::suite_ids().size(); }

const char* vd_verify_suite_id(size_t index) {
  const auto& ids = verify::suite_ids();
  return index < ids.size() ? ids[index].c_str() : nullptr;
}

vd_status vd_verify_run(const char* const* ids, size_t count, uint64_t seed, unsigned flags, int* passed,
                        char** report_json) {
  VD_REQUIRE(count == 0 || ids, "suite id array must not be null");
  VD_REQUIRE(report_json, "report output must not be null");
  *report_json = nullptr;
  return guarded([&] {
    std::vector<std::string> selected;
    for (size_t i = 0; i < count; ++i) {
      VD_REQUIRE(ids[i] != nullptr, "suite id must not be null");
      selected.emplace_back(ids[i]);
    }
    verify::Options opt;
    opt.seed = seed;
    opt.flip_q = (flags & VD_VERIFY_FIXTURE_FLIP_Q) != 0;
    const auto rep = verify::run(selected, opt);
    if (passed) *passed = rep.passed ? 1 : 0;
    *report_json = duplicate(io::report_json(rep).dump(2));
    return VD_OK;
  });
}

}  // extern "C"
