#pragma once

// File formats: trajectory CSV (17 significant digits, LF endings) and the
// JSON diagnostics and verification reports.

#include <ostream>
#include <string>

#include <json.hpp>

#include "continuum1d.hpp"
#include "dynamics.hpp"
#include "model.hpp"
#include "verify.hpp"

namespace vardiss::io {

/// Round-trip formatting, "%.17g".
std::string format_double(double x);

/// Columns: t, <label>..., <label>dot..., <label>ddot..., E, Qpow, balance_defect.
void write_particle_csv(std::ostream& os, const model::SystemModel& model, const dynamics::Trajectory& traj);

/// Columns: t, u_0..u_{N-1}, w_0..w_{N-1}.
void write_bar_csv(std::ostream& os, const continuum::BarTrajectory& traj);

nlohmann::json particle_diagnostics(const model::SystemModel& model, const dynamics::Trajectory& traj);
nlohmann::json bar_diagnostics(const continuum::BarConfig& cfg, const continuum::BarTrajectory& traj);
nlohmann::json report_json(const verify::Report& report);

}  // namespace vardiss::io
