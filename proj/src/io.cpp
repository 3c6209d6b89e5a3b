#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace vardiss::io {
namespace {

using nlohmann::json;

void write_row(std::ostream& os, std::initializer_list<std::span<const double>> groups) {
  bool first = true;
  for (auto group : groups) {
    for (double x : group) {
      if (!first) os << ',';
      os << format_double(x);
      first = false;
    }
  }
  os << '\n';
}

// JSON has no encoding for non-finite numbers; they become strings.
json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json series(std::span<const double> values) {
  json arr = json::array();
  for (double v : values) arr.push_back(number(v));
  return arr;
}

double max_of(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_particle_csv(std::ostream& os, const model::SystemModel& model, const dynamics::Trajectory& traj) {
  os << 't';
  for (const auto& l : model.labels()) os << ',' << l;
  for (const auto& l : model.labels()) os << ',' << l << "dot";
  for (const auto& l : model.labels()) os << ',' << l << "ddot";
  os << ",E,Qpow,balance_defect\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    const double tail[] = {traj.energy[k], traj.diss_power[k], traj.balance_defect[k]};
    write_row(os, {std::span<const double>(&t, 1), traj.states[k].x, traj.states[k].v, traj.accels[k], tail});
  }
}

void write_bar_csv(std::ostream& os, const continuum::BarTrajectory& traj) {
  const std::size_t n = traj.u.empty() ? 0 : traj.u.front().size();
  os << 't';
  for (std::size_t i = 0; i < n; ++i) os << ",u_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",w_" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    write_row(os, {std::span<const double>(&t, 1), traj.u[k], traj.w[k]});
  }
}

json particle_diagnostics(const model::SystemModel& model, const dynamics::Trajectory& traj) {
  json params = json::object();
  for (const auto& [name, value] : model.parameters()) params[name] = value;
  json d = {
      {"kind", "particle"},
      {"system", model.id()},
      {"parameters", params},
      {"status", dynamics::to_string(traj.status)},
      {"message", traj.message},
      {"steps", traj.steps},
      {"samples", traj.size()},
  };
  if (traj.size() > 0) {
    d["t_final"] = number(traj.times.back());
    d["energy_initial"] = number(traj.energy.front());
    d["energy_final"] = number(traj.energy.back());
    d["dissipated_work"] = number(traj.dissipated.back());
    d["max_balance_defect"] = number(max_of(traj.balance_defect));
  }
  return d;
}

json bar_diagnostics(const continuum::BarConfig& cfg, const continuum::BarTrajectory& traj) {
  json d = {
      {"kind", "bar"},
      {"config",
       {{"nodes", cfg.nodes},
        {"length", cfg.length},
        {"density_law", continuum::to_string(cfg.law)},
        {"rho0", cfg.rho0},
        {"beta", cfg.beta},
        {"alpha", cfg.alpha},
        {"m_exp", cfg.m_exp},
        {"delta", cfg.delta}}},
      {"status", continuum::to_string(traj.status)},
      {"message", traj.message},
      {"steps", traj.steps},
      {"samples", traj.size()},
      {"t", series(traj.times)},
      {"mass", series(traj.mass)},
      {"mass_exchange_rate", series(traj.exchange_rate)},
      {"kinetic_energy", series(traj.kinetic)},
      {"dissipation_rate", series(traj.dissipation)},
      {"dissipated_energy", series(traj.dissipated)},
  };
  if (traj.size() >= 3) {
    const auto audit = continuum::mass_audit(traj, cfg);
    d["mass_audit"] = {{"max_defect", number(audit.max_defect)},
                       {"mass_drift", number(audit.mass_drift)},
                       {"samples", audit.samples}};
  }
  return d;
}

json report_json(const verify::Report& report) {
  json suites = json::array();
  for (const auto& s : report.suites) {
    json checks = json::array();
    for (const auto& c : s.checks) {
      checks.push_back({{"name", c.name},
                        {"measured", number(c.measured)},
                        {"threshold", number(c.threshold)},
                        {"passed", c.passed},
                        {"anchor", c.anchor}});
    }
    suites.push_back({{"id", s.id}, {"passed", s.passed}, {"checks", checks}});
  }
  json r = {{"passed", report.passed},
            {"seed", report.seed},
            {"rng", report.rng},
            {"suites", suites}};
  if (report.flip_q) r["fixture"] = "flip-q";
  return r;
}

}  // namespace vardiss::io
