#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "continuum1d.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "model.hpp"
#include "tep.hpp"

namespace vardiss::verify {
namespace {

using std::numbers::pi;

Check make_check(std::string name, double measured, double threshold, std::string anchor, bool at_least = false) {
  const bool ok = std::isfinite(measured) && (at_least ? measured >= threshold : measured <= threshold);
  return {std::move(name), measured, threshold, ok, std::move(anchor)};
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Random states in an axis-aligned box, drawn from the suite stream.
struct Sampler {
  CounterRng rng;
  State state(std::span<const double> x_lo, std::span<const double> x_hi, std::span<const double> v_lo,
              std::span<const double> v_hi) {
    State s{std::vector<double>(x_lo.size()), std::vector<double>(v_lo.size()), 0.0};
    for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] = rng.uniform(x_lo[i], x_hi[i]);
    for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] = rng.uniform(v_lo[i], v_hi[i]);
    return s;
  }
};

// Hand-written disk_damper equation of motion
//   2 r^2 m (1 + sin phi) phi'' + r^2 m cos phi phi'^2 + r^2 eta (1 + cos phi)^2 phi' + r m g cos phi.
double disk_equation(double m, double r, double eta, double g, double phi, double rate, double acc) {
  const double c = 1.0 + std::cos(phi);
  return 2.0 * r * r * m * (1.0 + std::sin(phi)) * acc + r * r * m * std::cos(phi) * rate * rate +
         r * r * eta * c * c * rate + r * m * g * std::cos(phi);
}

SuiteResult eq3_equivalence(const Options& o) {
  constexpr double m = 1.0, r = 1.0, eta = 0.7, g = 9.81;
  const auto disk = model::build_disk_damper(m, r, eta, g);
  CounterRng rng(o.seed);
  double worst = 0.0;
  std::size_t n = 0;
  while (n < 1000) {
    const double phi = rng.uniform(-pi, pi);
    const double rate = rng.uniform(-10.0, 10.0);
    const double acc = rng.uniform(-100.0, 100.0);
    if (std::abs(phi + 0.5 * pi) < 0.1) continue;
    ++n;
    const State s{{phi}, {rate}, 0.0};
    const auto f = dynamics::residual(disk, s, std::vector<double>{acc});
    const double pipeline = o.flip_q ? f.d_k[0] + f.grad_g[0] - f.q[0] : f.residual[0];
    const double oracle = disk_equation(m, r, eta, g, phi, rate, acc);
    worst = std::max(worst, std::abs(pipeline - oracle) / (1.0 + std::abs(oracle)));
  }
  SuiteResult res{"eq3-equivalence", {}, false, 0.0};
  res.checks.push_back(make_check("disk_damper residual vs hand-derived equation of motion (1000 states)", worst,
                                  1e-10, "TEP force inserted into the Lagrange equations reproduces the disk EOM"));
  const auto acc0 = dynamics::solve_acceleration(disk, State{{0.0}, {0.0}, 0.0});
  res.checks.push_back(make_check("acceleration at rest at phi=0 equals -g/2", std::abs(acc0[0] + 0.5 * g), 1e-12,
                                  "disk EOM at phi = phidot = 0: 2 r^2 m phi'' + r m g = 0"));
  return res;
}

struct NamedQ {
  std::string name;
  ad::ScalarField q;
  std::vector<double> x_lo, x_hi, v_lo, v_hi;
  double degree;
};

std::vector<NamedQ> dissipation_catalogue() {
  std::vector<NamedQ> out;
  const auto disk = model::build_disk_damper(1.0, 1.0, 0.7, 9.81);
  out.push_back({"disk_damper", disk.dissipation(), {-pi}, {pi}, {-10.0}, {10.0}, 2.0});
  const auto ray = model::build_rayleigh_oscillator(1.0, 1.0, 0.7);
  out.push_back({"rayleigh_oscillator", ray.dissipation(), {-10.0}, {10.0}, {-10.0}, {10.0}, 2.0});
  for (double mexp : {1.5, 2.0, 3.0}) {
    out.push_back({"norton_hoff m=" + std::to_string(mexp).substr(0, 3), tep::norton_hoff_dissipation(2.5, mexp, 3),
                   std::vector<double>(3, -1.0), std::vector<double>(3, 1.0), std::vector<double>(3, -3.0),
                   std::vector<double>(3, 3.0), mexp});
  }
  return out;
}

SuiteResult power_identity(const Options& o) {
  SuiteResult res{"power-identity", {}, false, 0.0};
  Sampler sampler{CounterRng(o.seed)};
  for (const auto& entry : dissipation_catalogue()) {
    std::vector<State> states;
    for (int k = 0; k < 1000; ++k) states.push_back(sampler.state(entry.x_lo, entry.x_hi, entry.v_lo, entry.v_hi));
    const auto rep = tep::verify_power_identity(entry.q, states, 1e-12);
    res.checks.push_back(make_check(entry.name + ": max |q.v - Q| / (1 + |Q|) over 1000 states", rep.max_deviation,
                                    1e-12, "power identity q.v = Q"));
  }
  return res;
}

SuiteResult euler_homogeneity(const Options& o) {
  SuiteResult res{"euler-homogeneity", {}, false, 0.0};
  Sampler sampler{CounterRng(o.seed)};
  for (const auto& entry : dissipation_catalogue()) {
    double worst = 0.0, degree_error = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const State s = sampler.state(entry.x_lo, entry.x_hi, entry.v_lo, entry.v_hi);
      const auto f = tep::dissipative_force(entry.q, s);
      const double scale = inf_norm(f.q);
      if (scale == 0.0) continue;
      if (const auto deg = tep::homogeneity_degree(entry.q, s)) {
        degree_error = std::max(degree_error, std::abs(*deg - entry.degree));
      } else {
        degree_error = std::max(degree_error, 1.0);
      }
      const auto e = tep::euler_force(entry.q, s, entry.degree);
      double d = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) d = std::max(d, std::abs(e[i] - f.q[i]));
      worst = std::max(worst, d / scale);
    }
    res.checks.push_back(make_check(entry.name + ": |q - dQ/dv / degree| relative", worst, 1e-10,
                                    "Euler relation dQ/dv . v = degree Q for homogeneous Q"));
    res.checks.push_back(make_check(entry.name + ": detected homogeneity degree error", degree_error, 1e-8,
                                    "Euler relation dQ/dv . v = degree Q for homogeneous Q"));
  }
  return res;
}

SuiteResult norton_hoff_closed_form(const Options& o) {
  SuiteResult res{"norton-hoff-closed-form", {}, false, 0.0};
  CounterRng rng(o.seed);
  constexpr double alpha = 2.5;
  for (std::size_t dim : {1u, 3u, 6u}) {
    for (double mexp : {1.5, 2.0, 3.0}) {
      const auto q = tep::norton_hoff_dissipation(alpha, mexp, dim);
      double worst = 0.0;
      for (int k = 0; k < 1000; ++k) {
        State s{std::vector<double>(dim, 0.0), std::vector<double>(dim), 0.0};
        for (double& v : s.v) v = rng.uniform(-3.0, 3.0);
        const auto f = tep::dissipative_force(q, s);
        double norm = 0.0;
        for (double v : s.v) norm += v * v;
        norm = std::sqrt(norm);
        double d = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          const double exact = alpha * std::pow(norm, mexp - 2.0) * s.v[i];
          d = std::max(d, std::abs(f.q[i] - exact));
          scale = std::max(scale, std::abs(exact));
        }
        if (scale > 0.0) worst = std::max(worst, d / scale);
      }
      res.checks.push_back(make_check("dimension " + std::to_string(dim) + ", m=" + std::to_string(mexp).substr(0, 3) +
                                          ": |q - alpha |v|^(m-2) v| relative",
                                      worst, 1e-10, "Norton-Hoff stress sigma = alpha |eps_dot|^(m-2) eps_dot"));
    }
  }
  return res;
}

struct BalanceMeasure {
  double max_increase = 0.0;
  double balance = 0.0;  ///< |dE + W - int G_t| / |dE|
  double drift = 0.0;    ///< max |E - E0| / max(|E0|, 1)
  bool ok = false;
};

BalanceMeasure measure_balance(const model::SystemModel& sys, const State& s0, double t_end, double dt) {
  dynamics::IntegratorOptions opt;
  opt.dt = dt;
  const auto tr = dynamics::integrate(sys, s0, t_end, opt);
  BalanceMeasure b;
  b.ok = tr.ok();
  double gibbs_work = 0.0;
  for (std::size_t k = 1; k < tr.size(); ++k) {
    b.max_increase = std::max(b.max_increase, tr.energy[k] - tr.energy[k - 1]);
    gibbs_work += 0.5 * (tr.times[k] - tr.times[k - 1]) * (tr.gibbs_rate[k] + tr.gibbs_rate[k - 1]);
  }
  const double e0 = tr.energy.front();
  for (double e : tr.energy) b.drift = std::max(b.drift, std::abs(e - e0) / std::max(std::abs(e0), 1.0));
  const double de = tr.energy.back() - e0;
  b.balance = std::abs(de + tr.dissipated.back() - gibbs_work) / std::abs(de);
  if (!b.ok) b.balance = b.drift = b.max_increase = std::numeric_limits<double>::infinity();
  return b;
}

SuiteResult energy_balance(const Options&) {
  SuiteResult res{"energy-balance", {}, false, 0.0};
  const std::string anchor = "Legendre energy balance dE/dt = -Q + dG/dt";
  {
    const auto disk = model::build_disk_damper(1.0, 1.0, 0.7, 9.81);
    const auto b = measure_balance(disk, State{{0.0}, {0.0}, 0.0}, 0.5, 1e-3);
    res.checks.push_back(make_check("disk_damper eta=0.7, t in [0,0.5], rk4 dt=1e-3: max step increase of E",
                                    b.max_increase, 1e-12, anchor));
    res.checks.push_back(make_check("disk_damper eta=0.7, t in [0,0.5]: |dE + int Q dt| / |dE|", b.balance, 1e-6, anchor));
  }
  {
    const auto ray = model::build_rayleigh_oscillator(1.0, 1.0, 0.7);
    const auto b = measure_balance(ray, State{{1.0}, {0.0}, 0.0}, 10.0, 1e-3);
    res.checks.push_back(make_check("rayleigh eta=0.7, t in [0,10], rk4 dt=1e-3: max step increase of E",
                                    b.max_increase, 1e-12, anchor));
    res.checks.push_back(make_check("rayleigh eta=0.7, t in [0,10]: |dE + int Q dt| / |dE|", b.balance, 1e-6, anchor));
  }
  return res;
}

SuiteResult conservative_limit(const Options&) {
  SuiteResult res{"conservative-limit", {}, false, 0.0};
  const std::string anchor = "Q = 0 leaves the Legendre energy invariant";
  {
    const auto disk = model::build_disk_damper(1.0, 1.0, 0.0, 9.81);
    const auto b = measure_balance(disk, State{{0.0}, {0.0}, 0.0}, 0.4, 1e-4);
    res.checks.push_back(make_check("disk_damper eta=0, t in [0,0.4], rk4 dt=1e-4: max |E - E0| / max(|E0|,1)",
                                    b.drift, 1e-8, anchor));
  }
  {
    const auto ray = model::build_rayleigh_oscillator(1.0, 1.0, 0.0);
    const auto b = measure_balance(ray, State{{1.0}, {0.0}, 0.0}, 20.0 * pi, 1e-4);
    res.checks.push_back(make_check("rayleigh eta=0, 10 periods, rk4 dt=1e-4: max |E - E0| / max(|E0|,1)", b.drift,
                                    1e-8, anchor));
  }
  return res;
}

SuiteResult rayleigh_regression(const Options&) {
  SuiteResult res{"rayleigh-regression", {}, false, 0.0};
  constexpr double m = 1.0, k = 1.0, eta = 0.1;
  const double gamma = eta / (2.0 * m);
  const double wd = std::sqrt(k / m - gamma * gamma);
  const auto ray = model::build_rayleigh_oscillator(m, k, eta);
  dynamics::IntegratorOptions opt;
  opt.dt = 1e-3;
  const auto tr = dynamics::integrate(ray, State{{1.0}, {0.0}, 0.0}, 10.0 * 2.0 * pi / wd, opt);
  double worst = tr.ok() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    const double x = std::exp(-gamma * t) * (std::cos(wd * t) + gamma / wd * std::sin(wd * t));
    worst = std::max(worst, std::abs(tr.states[i].x[0] - x));
  }
  res.checks.push_back(make_check("max |x - closed-form damped oscillator| over 10 periods, rk4 dt=1e-3", worst, 1e-7,
                                  "m x'' + eta x' + k x = 0 recovered from K, G, Q"));
  return res;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

SuiteResult el_pde_equivalence(const Options&) {
  SuiteResult res{"el-pde-equivalence", {}, false, 0.0};
  std::vector<double> norms;
  for (std::size_t n : {51u, 101u, 201u}) {
    continuum::BarConfig cfg{n, 1.0, continuum::DensityLaw::linear, 1000.0, 5.0, 1e4, 2.0, 1e-8};
    const continuum::BarState s{continuum::sine_mode(cfg, 0.01), continuum::sine_mode(cfg, 0.1), 0.0};
    const auto a = continuum::momentum_rhs(s, cfg);
    norms.push_back(inf_norm(continuum::discrete_lagrangian_residual(s, a, cfg)));
  }
  const double rate = std::min(order(norms[0], norms[1]), order(norms[1], norms[2]));
  res.checks.push_back(make_check("observed order of |EL residual at a = momentum_rhs|_inf, N = 51, 101, 201", rate,
                                  1.9, "strong form of the bar = Euler-Lagrange equations of its Lagrangian", true));

  continuum::BarConfig flat{101, 1.0, continuum::DensityLaw::linear, 1000.0, 0.0, 1e4, 2.0, 1e-8};
  const continuum::BarState s{continuum::sine_mode(flat, 0.01), continuum::sine_mode(flat, 0.1), 0.0};
  const auto terms = continuum::momentum_terms(s, flat);
  res.checks.push_back(make_check("beta=0: max |extra inertial terms|",
                                  std::max(inf_norm(terms.rate_term), inf_norm(terms.gradient_term)), 0.0,
                                  "constant density removes both density-rate terms"));
  return res;
}

SuiteResult mass_audit(const Options&) {
  SuiteResult res{"mass-audit", {}, false, 0.0};
  std::vector<double> defects;
  for (std::size_t n : {51u, 101u, 201u}) {
    continuum::BarConfig cfg{n, 1.0, continuum::DensityLaw::exponential, 1000.0, 5.0, 10.0, 2.0, 1e-8};
    const continuum::BarState s{continuum::sine_mode(cfg, 0.05), continuum::sine_mode(cfg, 0.05), 0.0};
    const auto tr = continuum::integrate_bar(s, 0.5, cfg, 0.1 * cfg.dx());
    defects.push_back(tr.ok() ? continuum::mass_audit(tr, cfg).max_defect : std::numeric_limits<double>::quiet_NaN());
  }
  const double rate = std::min(order(defects[0], defects[1]), order(defects[1], defects[2]));
  const std::string anchor = "mass exchange dM/dt = int rho'(eps) eps_dot dx";
  res.checks.push_back(
      make_check("observed order of the mass-audit defect, N = 51, 101, 201 with dt = 0.1 dx", rate, 1.9, anchor, true));

  continuum::BarConfig flat{101, 1.0, continuum::DensityLaw::linear, 1000.0, 0.0, 10.0, 2.0, 1e-8};
  const continuum::BarState s{continuum::sine_mode(flat, 0.05), continuum::sine_mode(flat, 0.05), 0.0};
  const auto tr = continuum::integrate_bar(s, 0.5, flat, 0.1 * flat.dx());
  const auto audit = continuum::mass_audit(tr, flat);
  res.checks.push_back(make_check("beta=0: max |M - M0| / M0", tr.ok() ? audit.mass_drift / tr.mass.front() : 1.0,
                                  4.0 * std::numeric_limits<double>::epsilon(), anchor));
  return res;
}

// Central differences of f (or of its AD gradients) at step h.
SuiteResult ad_vs_fd(const Options& o) {
  SuiteResult res{"ad-vs-fd", {}, false, 0.0};
  constexpr double h = 1e-6;
  struct Entry {
    std::string name;
    ad::ScalarField f;
    std::vector<double> x_lo, x_hi, v_lo, v_hi;
  };
  std::vector<Entry> entries;
  const auto disk = model::build_disk_damper(1.3, 0.8, 0.7, 9.81);
  const auto ray = model::build_rayleigh_oscillator(1.3, 2.0, 0.7);
  for (const auto* sys : {&disk, &ray}) {
    const double span = sys == &disk ? 3.0 : 5.0;
    entries.push_back({sys->id() + ".K", sys->kinetic(), {-span}, {span}, {-5.0}, {5.0}});
    entries.push_back({sys->id() + ".G", sys->gibbs(), {-span}, {span}, {}, {}});
    entries.push_back({sys->id() + ".Q", sys->dissipation(), {-span}, {span}, {-5.0}, {5.0}});
  }
  entries.push_back({"norton_hoff m=3 n=3", tep::norton_hoff_dissipation(2.5, 3.0, 3), std::vector<double>(3, -1.0),
                     std::vector<double>(3, 1.0), std::vector<double>(3, -2.0), std::vector<double>(3, 2.0)});

  Sampler sampler{CounterRng(o.seed)};
  auto rel = [](double a, double fd) { return std::abs(a - fd) / std::max(1.0, std::abs(fd)); };
  for (const auto& e : entries) {
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      State s = sampler.state(e.x_lo, e.x_hi, e.v_lo, e.v_hi);
      const std::size_t nx = s.x.size(), nv = s.v.size();
      auto shifted = [&](bool in_x, std::size_t i, double d) {
        State t = s;
        (in_x ? t.x : t.v)[i] += d;
        return t;
      };
      const auto gx = ad::grad_x(e.f, s);
      for (std::size_t i = 0; i < nx; ++i) {
        const double fd = (ad::eval(e.f, shifted(true, i, h)) - ad::eval(e.f, shifted(true, i, -h))) / (2.0 * h);
        worst = std::max(worst, rel(gx[i], fd));
      }
      if (nv == 0) continue;
      const auto gv = ad::grad_v(e.f, s);
      const auto hvv = ad::hess_vv(e.f, s);
      const auto hvx = ad::hess_vx(e.f, s);
      for (std::size_t i = 0; i < nv; ++i) {
        const double fd = (ad::eval(e.f, shifted(false, i, h)) - ad::eval(e.f, shifted(false, i, -h))) / (2.0 * h);
        worst = std::max(worst, rel(gv[i], fd));
      }
      for (std::size_t j = 0; j < nv; ++j) {
        const auto up = ad::grad_v(e.f, shifted(false, j, h));
        const auto dn = ad::grad_v(e.f, shifted(false, j, -h));
        for (std::size_t i = 0; i < nv; ++i) worst = std::max(worst, rel(hvv(i, j), (up[i] - dn[i]) / (2.0 * h)));
      }
      for (std::size_t j = 0; j < nx; ++j) {
        const auto up = ad::grad_v(e.f, shifted(true, j, h));
        const auto dn = ad::grad_v(e.f, shifted(true, j, -h));
        for (std::size_t i = 0; i < nv; ++i) worst = std::max(worst, rel(hvx(i, j), (up[i] - dn[i]) / (2.0 * h)));
      }
    }
    res.checks.push_back(make_check(e.name + ": gradients and Hessian blocks vs central differences (h=1e-6)", worst,
                                    1e-6, "forward-mode derivatives of the potentials"));
  }
  return res;
}

using SuiteFn = std::function<SuiteResult(const Options&)>;

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> suites = {
      {"eq3-equivalence", eq3_equivalence},
      {"power-identity", power_identity},
      {"euler-homogeneity", euler_homogeneity},
      {"norton-hoff-closed-form", norton_hoff_closed_form},
      {"energy-balance", energy_balance},
      {"conservative-limit", conservative_limit},
      {"el-pde-equivalence", el_pde_equivalence},
      {"mass-audit", mass_audit},
      {"ad-vs-fd", ad_vs_fd},
      {"rayleigh-regression", rayleigh_regression},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& [id, fn] : registry()) out.push_back(id);
    return out;
  }();
  return ids;
}

bool is_known_suite(std::string_view id) {
  const auto& ids = suite_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

SuiteResult run_suite(std::string_view id, const Options& options) {
  for (const auto& [name, fn] : registry()) {
    if (name != id) continue;
    const auto start = std::chrono::steady_clock::now();
    SuiteResult res;
    try {
      res = fn(options);
    } catch (const std::exception& e) {
      res = SuiteResult{name, {}, false, 0.0};
      res.checks.push_back({std::string("suite raised: ") + e.what(), std::numeric_limits<double>::infinity(), 0.0,
                            false, "suite completes without error"});
    }
    res.passed = !res.checks.empty() &&
                 std::all_of(res.checks.begin(), res.checks.end(), [](const Check& c) { return c.passed; });
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  }
  throw Error(ErrorKind::unknown_suite, "unknown verification suite '" + std::string(id) + "'");
}

Report run(std::span<const std::string> ids, const Options& options) {
  for (const auto& id : ids) {
    if (!is_known_suite(id)) throw Error(ErrorKind::unknown_suite, "unknown verification suite '" + id + "'");
  }
  Report rep;
  rep.seed = options.seed;
  rep.flip_q = options.flip_q;
  const auto& selected = ids.empty() ? std::span<const std::string>(suite_ids()) : ids;
  for (const auto& id : selected) rep.suites.push_back(run_suite(id, options));
  rep.passed = !rep.suites.empty() &&
               std::all_of(rep.suites.begin(), rep.suites.end(), [](const SuiteResult& s) { return s.passed; });
  return rep;
}

}  // namespace vardiss::verify
