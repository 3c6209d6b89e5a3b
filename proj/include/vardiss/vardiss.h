#ifndef VARDISS_VARDISS_H
#define VARDISS_VARDISS_H

/*
 * C interface to the vardiss engine: dissipative Lagrangian dynamics from a
 * kinetic energy K, a Gibbs energy G and a dissipation function Q, plus a
 * one-dimensional variable-density Norton-Hoff bar.
 *
 * Every fallible call returns a vd_status. On failure the message is
 * available from vd_last_error() on the calling thread until the next call
 * on that thread. Handles are opaque; each vd_*_create / vd_*_integrate
 * result is released with the matching vd_*_free. Strings returned through
 * char** out-parameters are released with vd_free_string.
 *
 * Handles are immutable after creation and may be shared between threads.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(VARDISS_BUILDING)
#define VD_API __declspec(dllexport)
#else
#define VD_API __declspec(dllimport)
#endif
#else
#define VD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vd_status {
  VD_OK = 0,
  VD_ERR_INVALID_ARGUMENT = 1,
  VD_ERR_DIMENSION_MISMATCH = 2,
  VD_ERR_SINGULAR_DISSIPATION = 3,
  VD_ERR_DEGENERATE_MASS = 4,
  VD_ERR_STIFFNESS = 5,
  VD_ERR_INSTABILITY = 6,
  VD_ERR_DENSITY_COLLAPSE = 7,
  VD_ERR_UNKNOWN_SUITE = 8,
  VD_ERR_IO = 9,
  VD_ERR_INTERNAL = 10
} vd_status;

/* Outcome of an integration that produced a (possibly truncated) trajectory. */
typedef enum vd_run_status {
  VD_RUN_COMPLETED = 0,
  VD_RUN_DEGENERATE_MASS = 1,
  VD_RUN_STIFFNESS = 2,
  VD_RUN_INSTABILITY = 3,
  VD_RUN_DENSITY_COLLAPSE = 4
} vd_run_status;

typedef struct vd_system vd_system;
typedef struct vd_trajectory vd_trajectory;
typedef struct vd_bar vd_bar;
typedef struct vd_bar_trajectory vd_bar_trajectory;

VD_API const char* vd_version(void);
VD_API const char* vd_last_error(void);
VD_API const char* vd_status_name(vd_status status);
VD_API const char* vd_run_status_name(vd_run_status status);
VD_API void vd_free_string(char* s);
VD_API uint64_t vd_default_seed(void);

/* ---- lumped systems ---------------------------------------------------- */

VD_API size_t vd_builtin_count(void);
VD_API const char* vd_builtin_id(size_t index);

/* Builds a built-in system from name/value pairs. All parameters of the
 * system are required; unknown names are rejected. */
VD_API vd_status vd_system_create_builtin(const char* id, const char* const* names, const double* values,
                                          size_t count, vd_system** out);
VD_API void vd_system_free(vd_system* sys);
VD_API size_t vd_system_dim(const vd_system* sys);
VD_API const char* vd_system_label(const vd_system* sys, size_t index);
VD_API const char* vd_system_id(const vd_system* sys);

/* Arrays x, v, a and outputs have vd_system_dim entries. */
VD_API vd_status vd_system_residual(const vd_system* sys, const double* x, const double* v, double t, const double* a,
                                    double* residual);
VD_API vd_status vd_system_acceleration(const vd_system* sys, const double* x, const double* v, double t, double* a);
VD_API vd_status vd_system_dissipative_force(const vd_system* sys, const double* x, const double* v, double t,
                                             double* q, double* power);
VD_API vd_status vd_system_energy(const vd_system* sys, const double* x, const double* v, double t, double* energy);

typedef enum vd_method { VD_METHOD_RK4 = 0, VD_METHOD_RKF45 = 1 } vd_method;

typedef struct vd_integrator_options {
  vd_method method;
  double dt;       /* fixed step (rk4) or initial step (rkf45) */
  double abs_tol;  /* rkf45 only */
  double rel_tol;  /* rkf45 only */
  size_t stride;   /* keep every stride-th step and the last */
  size_t max_steps;
} vd_integrator_options;

VD_API void vd_integrator_options_default(vd_integrator_options* options);

/* Returns VD_OK whenever a trajectory was produced, including runs cut short
 * by a physical failure; inspect vd_trajectory_status. Fails without a
 * trajectory when the input is invalid or the initial state is unsolvable. */
VD_API vd_status vd_integrate(const vd_system* sys, const double* x0, const double* v0, double t0, double t_end,
                              const vd_integrator_options* options, vd_trajectory** out);
VD_API void vd_trajectory_free(vd_trajectory* traj);
VD_API size_t vd_trajectory_size(const vd_trajectory* traj);
VD_API size_t vd_trajectory_dim(const vd_trajectory* traj);
VD_API vd_run_status vd_trajectory_status(const vd_trajectory* traj);
VD_API const char* vd_trajectory_message(const vd_trajectory* traj);

typedef enum vd_series {
  VD_SERIES_TIME = 0,
  VD_SERIES_ENERGY = 1,
  VD_SERIES_DISSIPATION_POWER = 2,
  VD_SERIES_DISSIPATED_WORK = 3,
  VD_SERIES_BALANCE_DEFECT = 4
} vd_series;

/* Copies vd_trajectory_size values; capacity is checked. */
VD_API vd_status vd_trajectory_series(const vd_trajectory* traj, vd_series which, double* out, size_t capacity);
/* Any of x, v, a may be NULL. */
VD_API vd_status vd_trajectory_sample(const vd_trajectory* traj, size_t index, double* x, double* v, double* a);
VD_API vd_status vd_trajectory_write_csv(const vd_trajectory* traj, const char* path);
VD_API vd_status vd_trajectory_diagnostics_json(const vd_trajectory* traj, char** json);

/* ---- variable-density bar ---------------------------------------------- */

typedef enum vd_density_law { VD_DENSITY_LINEAR = 0, VD_DENSITY_EXPONENTIAL = 1 } vd_density_law;

typedef struct vd_bar_params {
  size_t nodes;
  double length;
  vd_density_law law;
  double rho0;
  double beta;
  double alpha;
  double m_exp;
  double delta; /* strain-rate regularization; 1e-8 is customary */
} vd_bar_params;

VD_API vd_status vd_bar_create(const vd_bar_params* params, vd_bar** out);
VD_API void vd_bar_free(vd_bar* bar);
VD_API size_t vd_bar_nodes(const vd_bar* bar);

/* Nodal arrays have vd_bar_nodes entries. */
VD_API vd_status vd_bar_sine_mode(const vd_bar* bar, double amplitude, int mode, double* out);
VD_API vd_status vd_bar_momentum_rhs(const vd_bar* bar, const double* u, const double* w, double* accel);
VD_API vd_status vd_bar_lagrangian_residual(const vd_bar* bar, const double* u, const double* w, const double* accel,
                                            double* residual);
VD_API vd_status vd_bar_stable_dt(const vd_bar* bar, const double* u, const double* w, double* dt);
VD_API vd_status vd_bar_total_mass(const vd_bar* bar, const double* u, double* mass);

VD_API vd_status vd_bar_integrate(const vd_bar* bar, const double* u0, const double* w0, double t_end, double dt,
                                  size_t stride, vd_bar_trajectory** out);
VD_API void vd_bar_trajectory_free(vd_bar_trajectory* traj);
VD_API size_t vd_bar_trajectory_size(const vd_bar_trajectory* traj);
VD_API vd_run_status vd_bar_trajectory_status(const vd_bar_trajectory* traj);
VD_API const char* vd_bar_trajectory_message(const vd_bar_trajectory* traj);

typedef enum vd_bar_series {
  VD_BAR_SERIES_TIME = 0,
  VD_BAR_SERIES_MASS = 1,
  VD_BAR_SERIES_MASS_EXCHANGE = 2,
  VD_BAR_SERIES_KINETIC_ENERGY = 3,
  VD_BAR_SERIES_DISSIPATION_RATE = 4,
  VD_BAR_SERIES_DISSIPATED_ENERGY = 5
} vd_bar_series;

VD_API vd_status vd_bar_trajectory_series(const vd_bar_trajectory* traj, vd_bar_series which, double* out,
                                          size_t capacity);
VD_API vd_status vd_bar_trajectory_sample(const vd_bar_trajectory* traj, size_t index, double* u, double* w);
VD_API vd_status vd_bar_trajectory_write_csv(const vd_bar_trajectory* traj, const char* path);
VD_API vd_status vd_bar_trajectory_diagnostics_json(const vd_bar_trajectory* traj, char** json);

/* ---- verification ------------------------------------------------------ */

#define VD_VERIFY_FIXTURE_FLIP_Q 1u

VD_API size_t vd_verify_suite_count(void);
VD_API const char* vd_verify_suite_id(size_t index);

/* Runs the listed suites (all when count == 0) and returns the JSON report.
 * *passed is 1 iff every check passed. Unknown ids fail with
 * VD_ERR_UNKNOWN_SUITE before any suite runs. */
VD_API vd_status vd_verify_run(const char* const* ids, size_t count, uint64_t seed, unsigned flags, int* passed,
                               char** report_json);

#ifdef __cplusplus
}
#endif

#endif
