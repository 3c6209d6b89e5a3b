// Command-line front end: simulate, verify and sweep. Talks to the engine
// exclusively through the C interface.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vardiss/vardiss.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CString {
  char* p = nullptr;
  ~CString() { vd_free_string(p); }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using SystemHandle = Handle<vd_system, vd_system_free>;
using TrajectoryHandle = Handle<vd_trajectory, vd_trajectory_free>;
using BarHandle = Handle<vd_bar, vd_bar_free>;
using BarTrajectoryHandle = Handle<vd_bar_trajectory, vd_bar_trajectory_free>;

// ---- strict config parsing -------------------------------------------------

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const json& require_key(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing key '" + key + "' in " + where);
  return *it;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& what) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(what + " must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(number(e, what + " entry"));
  return out;
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) throw ConfigError(what + " must be a string");
  return v.get<std::string>();
}

std::vector<std::string> known_suites() {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < vd_verify_suite_count(); ++i) ids.emplace_back(vd_verify_suite_id(i));
  return ids;
}

struct ParticleJob {
  std::string id;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> x, v;
  double t0 = 0.0;
  double t_end = 0.0;
  vd_integrator_options options{};
};

// A nodal field given either explicitly or as a sine mode.
struct NodalField {
  std::vector<double> values;
  double amplitude = 0.0;
  int mode = 1;
  bool explicit_values = false;
};

struct BarJob {
  vd_bar_params params{};
  NodalField u, w;
  double t_end = 0.0;
  double dt = 0.0;
  std::size_t stride = 1;
};

struct Job {
  std::variant<ParticleJob, BarJob> body;
  std::string csv_name = "trajectory.csv";
  std::string diagnostics_name = "diagnostics.json";
  std::vector<std::string> verify;
};

NodalField parse_field(const json& v, const std::string& where) {
  NodalField f;
  if (v.is_array()) {
    f.values = numbers(v, where);
    f.explicit_values = true;
    return f;
  }
  check_keys(v, {"sine"}, where);
  const auto& s = require_key(v, "sine", where);
  check_keys(s, {"amplitude", "mode"}, where + ".sine");
  f.amplitude = number(require_key(s, "amplitude", where + ".sine"), where + ".sine.amplitude");
  if (s.contains("mode")) {
    if (!s["mode"].is_number_integer()) throw ConfigError(where + ".sine.mode must be an integer");
    f.mode = s["mode"].get<int>();
  }
  return f;
}

vd_integrator_options parse_integrator(const json& cfg) {
  vd_integrator_options opt;
  vd_integrator_options_default(&opt);
  if (!cfg.contains("integrator")) return opt;
  const auto& in = cfg["integrator"];
  check_keys(in, {"method", "dt", "abs_tol", "rel_tol", "stride", "max_steps"}, "integrator");
  if (in.contains("method")) {
    const auto m = text(in["method"], "integrator.method");
    if (m == "rk4") {
      opt.method = VD_METHOD_RK4;
    } else if (m == "rkf45") {
      opt.method = VD_METHOD_RKF45;
    } else {
      throw ConfigError("integrator.method must be 'rk4' or 'rkf45'");
    }
  }
  if (in.contains("dt")) opt.dt = number(in["dt"], "integrator.dt");
  if (in.contains("abs_tol")) opt.abs_tol = number(in["abs_tol"], "integrator.abs_tol");
  if (in.contains("rel_tol")) opt.rel_tol = number(in["rel_tol"], "integrator.rel_tol");
  if (in.contains("stride")) opt.stride = count(in["stride"], "integrator.stride");
  if (in.contains("max_steps")) opt.max_steps = count(in["max_steps"], "integrator.max_steps");
  return opt;
}

BarJob parse_bar(const json& cfg) {
  BarJob job;
  const auto& p = require_key(cfg, "parameters", "config");
  check_keys(p, {"nodes", "length", "density_law", "rho0", "beta", "alpha", "m_exp", "delta"}, "parameters");
  job.params.nodes = count(require_key(p, "nodes", "parameters"), "parameters.nodes");
  job.params.length = number(require_key(p, "length", "parameters"), "parameters.length");
  const auto law = text(require_key(p, "density_law", "parameters"), "parameters.density_law");
  if (law == "linear") {
    job.params.law = VD_DENSITY_LINEAR;
  } else if (law == "exponential") {
    job.params.law = VD_DENSITY_EXPONENTIAL;
  } else {
    throw ConfigError("parameters.density_law must be 'linear' or 'exponential'");
  }
  job.params.rho0 = number(require_key(p, "rho0", "parameters"), "parameters.rho0");
  job.params.beta = number(require_key(p, "beta", "parameters"), "parameters.beta");
  job.params.alpha = number(require_key(p, "alpha", "parameters"), "parameters.alpha");
  job.params.m_exp = number(require_key(p, "m_exp", "parameters"), "parameters.m_exp");
  job.params.delta = p.contains("delta") ? number(p["delta"], "parameters.delta") : 1e-8;

  const auto& init = require_key(cfg, "initial", "config");
  check_keys(init, {"u", "w"}, "initial");
  job.u = parse_field(require_key(init, "u", "initial"), "initial.u");
  job.w = parse_field(require_key(init, "w", "initial"), "initial.w");
  job.t_end = number(require_key(cfg, "t_end", "config"), "t_end");

  const auto& in = require_key(cfg, "integrator", "config");
  check_keys(in, {"dt", "stride"}, "integrator");
  job.dt = number(require_key(in, "dt", "integrator"), "integrator.dt");
  if (in.contains("stride")) job.stride = count(in["stride"], "integrator.stride");
  return job;
}

ParticleJob parse_particle(const json& cfg, const std::string& id) {
  ParticleJob job;
  job.id = id;
  const auto& p = require_key(cfg, "parameters", "config");
  if (!p.is_object()) throw ConfigError("parameters must be an object");
  for (const auto& [name, value] : p.items()) {
    job.names.push_back(name);
    job.values.push_back(number(value, "parameters." + name));
  }
  const auto& init = require_key(cfg, "initial", "config");
  check_keys(init, {"x", "v", "t"}, "initial");
  job.x = numbers(require_key(init, "x", "initial"), "initial.x");
  job.v = numbers(require_key(init, "v", "initial"), "initial.v");
  if (init.contains("t")) job.t0 = number(init["t"], "initial.t");
  job.t_end = number(require_key(cfg, "t_end", "config"), "t_end");
  job.options = parse_integrator(cfg);
  return job;
}

Job parse_job(const json& cfg) {
  check_keys(cfg, {"system", "parameters", "initial", "t_end", "integrator", "output", "verify"}, "config");
  Job job;
  const auto system = text(require_key(cfg, "system", "config"), "system");
  if (system == "bar") {
    job.body = parse_bar(cfg);
  } else {
    job.body = parse_particle(cfg, system);
  }
  if (cfg.contains("output")) {
    const auto& out = cfg["output"];
    check_keys(out, {"csv", "diagnostics"}, "output");
    if (out.contains("csv")) job.csv_name = text(out["csv"], "output.csv");
    if (out.contains("diagnostics")) job.diagnostics_name = text(out["diagnostics"], "output.diagnostics");
    for (const auto* name : {&job.csv_name, &job.diagnostics_name}) {
      if (fs::path(*name).has_parent_path() || name->empty()) {
        throw ConfigError("output file names must be plain file names");
      }
    }
  }
  if (cfg.contains("verify")) {
    const auto suites = known_suites();
    if (!cfg["verify"].is_array()) throw ConfigError("verify must be an array of suite ids");
    for (const auto& s : cfg["verify"]) {
      const auto id = text(s, "verify entry");
      if (std::find(suites.begin(), suites.end(), id) == suites.end()) {
        throw ConfigError("unknown verification suite '" + id + "'");
      }
      job.verify.push_back(id);
    }
  }
  return job;
}

json read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// ---- running ---------------------------------------------------------------

struct Outcome {
  int exit_code = kExitOk;
  std::string status;  ///< run status or error kind
  std::string message;
};

bool is_config_status(vd_status s) {
  return s == VD_ERR_INVALID_ARGUMENT || s == VD_ERR_DIMENSION_MISMATCH || s == VD_ERR_UNKNOWN_SUITE;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  if (!content.empty() && content.back() != '\n') os << '\n';
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

json error_record(vd_status status, const std::string& message) {
  return {{"kind", vd_status_name(status)}, {"message", message}};
}

// Runtime failure before any trajectory exists: diagnostics carry only the error.
Outcome runtime_failure(const fs::path& out, const Job& job, const std::string& kind, vd_status status) {
  const std::string message = vd_last_error();
  fs::create_directories(out);
  json d = {{"kind", kind}, {"status", "error"}, {"error", error_record(status, message)}};
  write_text(out / job.diagnostics_name, d.dump(2));
  return {kExitRuntime, vd_status_name(status), message};
}

Outcome config_failure(vd_status status) { return {kExitConfig, vd_status_name(status), vd_last_error()}; }

Outcome finish_run(const fs::path& out, const Job& job, char* diagnostics, vd_run_status run, const char* message) {
  CString owned{diagnostics};
  json d = json::parse(owned.p);
  Outcome o{kExitOk, vd_run_status_name(run), message};
  if (run != VD_RUN_COMPLETED) {
    o.exit_code = kExitRuntime;
    d["error"] = {{"kind", vd_run_status_name(run)}, {"message", message}};
  }
  write_text(out / job.diagnostics_name, d.dump(2));
  return o;
}

Outcome run_particle(const ParticleJob& pj, const Job& job, const fs::path& out) {
  std::vector<const char*> names;
  for (const auto& n : pj.names) names.push_back(n.c_str());
  SystemHandle sys;
  if (auto s = vd_system_create_builtin(pj.id.c_str(), names.data(), pj.values.data(), names.size(), &sys.p); s != VD_OK) {
    return config_failure(s);
  }
  const std::size_t n = vd_system_dim(sys.p);
  if (pj.x.size() != n || pj.v.size() != n) {
    return {kExitConfig, "dimension_mismatch",
            "initial.x and initial.v must have " + std::to_string(n) + " entries for '" + pj.id + "'"};
  }
  TrajectoryHandle traj;
  if (auto s = vd_integrate(sys.p, pj.x.data(), pj.v.data(), pj.t0, pj.t_end, &pj.options, &traj.p); s != VD_OK) {
    if (is_config_status(s)) return config_failure(s);
    return runtime_failure(out, job, "particle", s);
  }
  fs::create_directories(out);
  if (vd_trajectory_write_csv(traj.p, (out / job.csv_name).string().c_str()) != VD_OK) {
    return {kExitRuntime, "io", vd_last_error()};
  }
  char* diag = nullptr;
  if (vd_trajectory_diagnostics_json(traj.p, &diag) != VD_OK) return {kExitRuntime, "io", vd_last_error()};
  return finish_run(out, job, diag, vd_trajectory_status(traj.p), vd_trajectory_message(traj.p));
}

std::optional<Outcome> materialize(const vd_bar* bar, const NodalField& f, const char* name, std::vector<double>& out) {
  const std::size_t n = vd_bar_nodes(bar);
  if (f.explicit_values) {
    if (f.values.size() != n) {
      return Outcome{kExitConfig, "dimension_mismatch",
                     std::string("initial.") + name + " must have " + std::to_string(n) + " entries"};
    }
    out = f.values;
    return std::nullopt;
  }
  out.assign(n, 0.0);
  if (auto s = vd_bar_sine_mode(bar, f.amplitude, f.mode, out.data()); s != VD_OK) return config_failure(s);
  return std::nullopt;
}

Outcome run_bar(const BarJob& bj, const Job& job, const fs::path& out) {
  BarHandle bar;
  if (auto s = vd_bar_create(&bj.params, &bar.p); s != VD_OK) return config_failure(s);
  std::vector<double> u, w;
  if (auto o = materialize(bar.p, bj.u, "u", u)) return *o;
  if (auto o = materialize(bar.p, bj.w, "w", w)) return *o;
  BarTrajectoryHandle traj;
  if (auto s = vd_bar_integrate(bar.p, u.data(), w.data(), bj.t_end, bj.dt, bj.stride, &traj.p); s != VD_OK) {
    if (is_config_status(s)) return config_failure(s);
    return runtime_failure(out, job, "bar", s);
  }
  fs::create_directories(out);
  if (vd_bar_trajectory_write_csv(traj.p, (out / job.csv_name).string().c_str()) != VD_OK) {
    return {kExitRuntime, "io", vd_last_error()};
  }
  char* diag = nullptr;
  if (vd_bar_trajectory_diagnostics_json(traj.p, &diag) != VD_OK) return {kExitRuntime, "io", vd_last_error()};
  return finish_run(out, job, diag, vd_bar_trajectory_status(traj.p), vd_bar_trajectory_message(traj.p));
}

struct VerifyResult {
  vd_status status = VD_OK;
  bool passed = false;
  std::string report;
};

VerifyResult run_verify(const std::vector<std::string>& suites, std::uint64_t seed, unsigned flags) {
  std::vector<const char*> ids;
  for (const auto& s : suites) ids.push_back(s.c_str());
  VerifyResult r;
  CString report;
  int passed = 0;
  r.status = vd_verify_run(ids.data(), ids.size(), seed, flags, &passed, &report.p);
  if (r.status == VD_OK) {
    r.passed = passed != 0;
    r.report = report.p;
  }
  return r;
}

Outcome run_job(const Job& job, const fs::path& out) {
  Outcome o = std::visit(
      [&](const auto& body) {
        if constexpr (std::is_same_v<std::decay_t<decltype(body)>, ParticleJob>) {
          return run_particle(body, job, out);
        } else {
          return run_bar(body, job, out);
        }
      },
      job.body);
  if (o.exit_code == kExitOk && !job.verify.empty()) {
    const auto v = run_verify(job.verify, vd_default_seed(), 0);
    if (v.status != VD_OK) return {kExitRuntime, vd_status_name(v.status), vd_last_error()};
    write_text(out / "verify_report.json", v.report);
    if (!v.passed) o = {kExitFailed, "verify_failed", "one or more verification checks failed"};
  }
  return o;
}

void print_error(const Outcome& o) {
  json e = {{"error", {{"exit_code", o.exit_code}, {"kind", o.status}, {"message", o.message}}}};
  std::cerr << e.dump() << '\n';
}

// ---- subcommands -----------------------------------------------------------

int cmd_simulate(const fs::path& config, const fs::path& out) {
  Job job;
  try {
    job = parse_job(read_config(config));
  } catch (const ConfigError& e) {
    print_error({kExitConfig, "config", e.what()});
    return kExitConfig;
  }
  const Outcome o = run_job(job, out);
  if (o.exit_code != kExitOk) {
    print_error(o);
  } else {
    std::cout << "wrote " << (out / job.csv_name).string() << " and " << (out / job.diagnostics_name).string() << '\n';
  }
  return o.exit_code;
}

int cmd_verify(const std::vector<std::string>& suites, const fs::path& report_path, std::uint64_t seed,
               const std::string& fixture) {
  const auto known = known_suites();
  for (const auto& s : suites) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      print_error({kExitConfig, "unknown_suite", "unknown verification suite '" + s + "'"});
      return kExitConfig;
    }
  }
  unsigned flags = 0;
  if (fixture == "flip-q") {
    flags |= VD_VERIFY_FIXTURE_FLIP_Q;
  } else if (!fixture.empty()) {
    print_error({kExitConfig, "config", "unknown fixture '" + fixture + "'"});
    return kExitConfig;
  }
  const auto r = run_verify(suites, seed, flags);
  if (r.status != VD_OK) {
    const Outcome o{is_config_status(r.status) ? kExitConfig : kExitRuntime, vd_status_name(r.status), vd_last_error()};
    print_error(o);
    return o.exit_code;
  }
  if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
  write_text(report_path, r.report);
  const json rep = json::parse(r.report);
  for (const auto& s : rep["suites"]) {
    std::cout << (s["passed"].get<bool>() ? "PASS " : "FAIL ") << s["id"].get<std::string>() << '\n';
    for (const auto& c : s["checks"]) {
      if (!c["passed"].get<bool>()) std::cout << "    failed: " << c["name"].get<std::string>() << '\n';
    }
  }
  std::cout << (r.passed ? "all checks passed" : "verification failed") << '\n';
  return r.passed ? kExitOk : kExitFailed;
}

unsigned thread_budget() {
  if (const char* env = std::getenv("THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring THREADS='" << env << "' (expected a positive integer)\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Parameter overrides for every sweep point: the cartesian product of "grid"
// (empty grid -> no points), or the explicit "points" list.
std::vector<json> sweep_points(const json& cfg) {
  const bool has_grid = cfg.contains("grid");
  const bool has_points = cfg.contains("points");
  if (has_grid == has_points) throw ConfigError("sweep config needs exactly one of 'grid' or 'points'");
  std::vector<json> points;
  if (has_points) {
    if (!cfg["points"].is_array()) throw ConfigError("points must be an array of objects");
    for (const auto& p : cfg["points"]) {
      if (!p.is_object()) throw ConfigError("points must be an array of objects");
      points.push_back(p);
    }
    return points;
  }
  const auto& grid = cfg["grid"];
  if (!grid.is_object()) throw ConfigError("grid must be an object of name -> array");
  if (grid.empty()) return points;
  points.push_back(json::object());
  for (const auto& [name, values] : grid.items()) {
    if (!values.is_array()) throw ConfigError("grid." + name + " must be an array");
    std::vector<json> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        json q = p;
        q[name] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

int cmd_sweep(const fs::path& config, const fs::path& out) {
  json cfg;
  std::vector<json> points;
  try {
    cfg = read_config(config);
    check_keys(cfg, {"base", "grid", "points"}, "sweep config");
    if (!require_key(cfg, "base", "sweep config").is_object()) throw ConfigError("base must be an object");
    points = sweep_points(cfg);
  } catch (const ConfigError& e) {
    print_error({kExitConfig, "config", e.what()});
    return kExitConfig;
  }

  std::vector<json> entries(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      char dir[32];
      std::snprintf(dir, sizeof dir, "point_%04zu", i);
      json entry = {{"index", i}, {"parameters", points[i]}, {"dir", dir}};
      Outcome o;
      try {
        json point_cfg = cfg["base"];
        for (const auto& [name, value] : points[i].items()) point_cfg["parameters"][name] = value;
        o = run_job(parse_job(point_cfg), out / dir);
      } catch (const ConfigError& e) {
        o = {kExitConfig, "config", e.what()};
      } catch (const std::exception& e) {
        o = {kExitRuntime, "internal", e.what()};
      }
      entry["exit_code"] = o.exit_code;
      entry["status"] = o.status;
      if (o.exit_code != kExitOk) entry["error"] = o.message;
      entries[i] = std::move(entry);
    }
  };
  const unsigned threads = std::min<std::size_t>(thread_budget(), std::max<std::size_t>(points.size(), 1));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::size_t failed = 0;
  for (const auto& e : entries) failed += e["exit_code"].get<int>() != kExitOk;
  const json index = {{"points", entries}, {"total", entries.size()}, {"failed", failed}};
  fs::create_directories(out);
  write_text(out / "index.json", index.dump(2));
  std::cout << entries.size() - failed << " of " << entries.size() << " points succeeded\n";
  return failed == 0 ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vardiss: dissipative variational dynamics"};
  app.set_version_flag("--version", std::string(vd_version()));
  app.require_subcommand(1);

  std::string sim_config, sim_out;
  auto* simulate = app.add_subcommand("simulate", "Integrate a configured system and write CSV + diagnostics");
  simulate->add_option("--config", sim_config, "JSON run configuration")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();

  std::vector<std::string> suites;
  std::string report, fixture;
  std::uint64_t seed = vd_default_seed();
  auto* verify = app.add_subcommand("verify", "Run verification suites and write a JSON report");
  verify->add_option("--suite", suites, "Suite id (repeatable; default: all)");
  verify->add_option("--report", report, "Report path")->required();
  verify->add_option("--seed", seed, "Seed of the sample generator");
  verify->add_option("--fixture", fixture, "Harness self-test fixture (flip-q)")->group("");

  std::string sweep_config, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid concurrently (THREADS caps workers)");
  sweep->add_option("--config", sweep_config, "JSON sweep configuration")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim_config, sim_out);
    if (*verify) return cmd_verify(suites, report, seed, fixture);
    if (*sweep) return cmd_sweep(sweep_config, sweep_out);
  } catch (const std::exception& e) {
    print_error({kExitRuntime, "internal", e.what()});
    return kExitRuntime;
  }
  return kExitConfig;
}
