// Acceptance suite. One line per criterion:
//   [PASS|FAIL] C<k> <title>: <measurement> (threshold) [seconds]
// Usage: acceptance [--criterion k]   (all criteria when omitted)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "continuum1d.hpp"
#include "dynamics.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "tep.hpp"
#include "verify.hpp"

using namespace vardiss;
using std::numbers::pi;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- hand-derived oracles ---------------------------------------------------

double disk_eom(double m, double r, double eta, double g, double phi, double rate, double acc) {
  const double c = 1.0 + std::cos(phi);
  return 2.0 * r * r * m * (1.0 + std::sin(phi)) * acc + r * r * m * std::cos(phi) * rate * rate +
         r * r * eta * c * c * rate + r * m * g * std::cos(phi);
}

double c1_deviation(bool flip_q) {
  constexpr double m = 1.0, r = 1.0, eta = 0.7, g = 9.81;
  const auto disk = model::build_disk_damper(m, r, eta, g);
  CounterRng rng(kDefaultSeed);
  double worst = 0.0;
  for (int n = 0; n < 1000;) {
    const double phi = rng.uniform(-pi, pi);
    const double rate = rng.uniform(-10.0, 10.0);
    const double acc = rng.uniform(-100.0, 100.0);
    if (std::abs(phi + 0.5 * pi) < 0.1) continue;
    ++n;
    const auto f = dynamics::residual(disk, State{{phi}, {rate}, 0.0}, std::vector<double>{acc});
    const double pipeline = flip_q ? f.d_k[0] + f.grad_g[0] - f.q[0] : f.residual[0];
    const double lhs = disk_eom(m, r, eta, g, phi, rate, acc);
    worst = std::max(worst, std::abs(pipeline - lhs) / (1.0 + std::abs(lhs)));
  }
  return worst;
}

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double dev = c1_deviation(false);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {dev <= 1e-10 && secs < 1.0,
          fmt("max |residual - EOM| / (1 + |EOM|) = %.3e (<= 1e-10) over 1000 states, %.3f s (< 1 s)", dev, secs)};
}

// Closed-form dissipation functions with their rate gradients and degrees.
struct ClosedQ {
  std::string name;
  ad::ScalarField field;
  std::size_t nx, nv;
  double x_span, v_span;
  std::function<double(const State&)> q;
  std::function<std::vector<double>(const State&)> dq;
  double degree;
};

std::vector<ClosedQ> closed_dissipations() {
  std::vector<ClosedQ> out;
  const double eta = 0.7, r = 1.0;
  out.push_back({"disk_damper", model::build_disk_damper(1.0, r, eta, 9.81).dissipation(), 1, 1, pi, 10.0,
                 [=](const State& s) {
                   const double c = 1.0 + std::cos(s.x[0]);
                   return eta * r * r * c * c * s.v[0] * s.v[0];
                 },
                 [=](const State& s) {
                   const double c = 1.0 + std::cos(s.x[0]);
                   return std::vector<double>{2.0 * eta * r * r * c * c * s.v[0]};
                 },
                 2.0});
  out.push_back({"rayleigh", model::build_rayleigh_oscillator(1.0, 1.0, eta).dissipation(), 1, 1, 10.0, 10.0,
                 [=](const State& s) { return eta * s.v[0] * s.v[0]; },
                 [=](const State& s) { return std::vector<double>{2.0 * eta * s.v[0]}; }, 2.0});
  const double alpha = 2.5;
  for (double m : {1.5, 2.0, 3.0}) {
    auto norm = [](const State& s) {
      double n2 = 0.0;
      for (double v : s.v) n2 += v * v;
      return std::sqrt(n2);
    };
    out.push_back({fmt("norton_hoff(m=%.1f)", m), tep::norton_hoff_dissipation(alpha, m, 3), 3, 3, 1.0, 3.0,
                   [=](const State& s) { return alpha * std::pow(norm(s), m); },
                   [=](const State& s) {
                     std::vector<double> g(s.v.size());
                     const double n = norm(s);
                     for (std::size_t i = 0; i < g.size(); ++i) g[i] = alpha * m * std::pow(n, m - 2.0) * s.v[i];
                     return g;
                   },
                   m});
  }
  return out;
}

State random_state(CounterRng& rng, std::size_t nx, std::size_t nv, double xs, double vs) {
  State s{std::vector<double>(nx), std::vector<double>(nv), 0.0};
  for (double& x : s.x) x = rng.uniform(-xs, xs);
  for (double& v : s.v) v = rng.uniform(-vs, vs);
  return s;
}

Outcome c2() {
  CounterRng rng(kDefaultSeed);
  double worst = 0.0;
  std::string where;
  for (const auto& d : closed_dissipations()) {
    for (int k = 0; k < 1000; ++k) {
      const State s = random_state(rng, d.nx, d.nv, d.x_span, d.v_span);
      const double q_exact = d.q(s);
      if (q_exact == 0.0) continue;
      const auto f = tep::dissipative_force(d.field, s);
      double qv = 0.0;
      for (std::size_t i = 0; i < s.v.size(); ++i) qv += f.q[i] * s.v[i];
      const double dev = std::abs(qv - q_exact) / std::abs(q_exact);
      if (dev > worst) {
        worst = dev;
        where = d.name;
      }
    }
  }
  return {worst <= 1e-12, fmt("max |q.v - Q| / |Q| = %.3e (<= 1e-12) over 5 x 1000 states%s%s", worst,
                              where.empty() ? "" : ", worst in ", where.c_str())};
}

Outcome c3() {
  CounterRng rng(kDefaultSeed);
  double worst = 0.0;
  for (const auto& d : closed_dissipations()) {
    for (int k = 0; k < 1000; ++k) {
      const State s = random_state(rng, d.nx, d.nv, d.x_span, d.v_span);
      const auto f = tep::dissipative_force(d.field, s);
      const auto g = d.dq(s);
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        diff = std::max(diff, std::abs(f.q[i] - g[i] / d.degree));
        scale = std::max(scale, std::abs(g[i] / d.degree));
      }
      if (scale > 0.0) worst = std::max(worst, diff / scale);
    }
  }
  return {worst <= 1e-10, fmt("max |q - (1/deg) dQ/dv| / |(1/deg) dQ/dv| = %.3e (<= 1e-10)", worst)};
}

Outcome c4() {
  CounterRng rng(kDefaultSeed);
  const double alpha = 3.7;
  double worst = 0.0;
  for (std::size_t dim : {1u, 3u, 6u}) {
    for (double m : {1.5, 2.0, 3.0}) {
      const auto field = tep::norton_hoff_dissipation(alpha, m, dim);
      for (int k = 0; k < 1000; ++k) {
        const State s = random_state(rng, dim, dim, 1.0, 4.0);
        double n2 = 0.0;
        for (double v : s.v) n2 += v * v;
        const double n = std::sqrt(n2);
        const auto f = tep::dissipative_force(field, s);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          const double sigma = alpha * std::pow(n, m - 2.0) * s.v[i];
          diff = std::max(diff, std::abs(f.q[i] - sigma));
          scale = std::max(scale, std::abs(sigma));
        }
        if (scale > 0.0) worst = std::max(worst, diff / scale);
      }
    }
  }
  return {worst <= 1e-10, fmt("max |q - alpha |v|^(m-2) v| relative = %.3e (<= 1e-10), dims 1/3/6, m 1.5/2/3", worst)};
}

Outcome c5() {
  constexpr double h = 1e-6;
  CounterRng rng(kDefaultSeed);
  auto rel = [](double a, double fd) { return std::abs(a - fd) / std::max(1.0, std::abs(fd)); };
  const auto disk = model::build_disk_damper(1.3, 0.8, 0.7, 9.81);
  const auto ray = model::build_rayleigh_oscillator(1.3, 2.0, 0.7);
  double worst = 0.0;
  std::size_t blocks = 0;
  for (const auto* sys : {&disk, &ray}) {
    for (const auto* f : {&sys->kinetic(), &sys->gibbs(), &sys->dissipation()}) {
      const std::size_t nv = f->arity().nv;
      for (int k = 0; k < 200; ++k) {
        const State s = random_state(rng, 1, nv, 3.0, 5.0);
        auto at = [&](double dx, double dv) {
          State t = s;
          t.x[0] += dx;
          if (nv) t.v[0] += dv;
          return t;
        };
        worst = std::max(worst, rel(ad::grad_x(*f, s)[0], (ad::eval(*f, at(h, 0)) - ad::eval(*f, at(-h, 0))) / (2 * h)));
        ++blocks;
        if (!nv) continue;
        worst = std::max(worst, rel(ad::grad_v(*f, s)[0], (ad::eval(*f, at(0, h)) - ad::eval(*f, at(0, -h))) / (2 * h)));
        worst = std::max(worst, rel(ad::hess_vv(*f, s)(0, 0),
                                    (ad::grad_v(*f, at(0, h))[0] - ad::grad_v(*f, at(0, -h))[0]) / (2 * h)));
        worst = std::max(worst, rel(ad::hess_vx(*f, s)(0, 0),
                                    (ad::grad_v(*f, at(h, 0))[0] - ad::grad_v(*f, at(-h, 0))[0]) / (2 * h)));
        blocks += 3;
      }
    }
  }
  return {worst <= 1e-6, fmt("max |AD - central FD| / max(1, |FD|) = %.3e (<= 1e-6) over %zu derivative blocks", worst,
                             blocks)};
}

Outcome c6() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto disk = model::build_disk_damper(1.0, 1.0, 0.7, 9.81);
  dynamics::IntegratorOptions opt;
  opt.dt = 1e-3;
  const auto tr = dynamics::integrate(disk, State{{0.0}, {0.0}, 0.0}, 10.0, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double rise = 0.0;
  for (std::size_t k = 1; k < tr.size(); ++k) rise = std::max(rise, tr.energy[k] - tr.energy[k - 1]);
  const double de = tr.energy.back() - tr.energy.front();
  const double balance = std::abs(de + tr.dissipated.back()) / std::abs(de);
  const bool ok = tr.ok() && rise <= 1e-12 && balance <= 1e-6 && secs < 5.0;
  return {ok, fmt("run %s at t=%.4f (needs t=10, phi=%.6f); max E increase %.3e (<= 1e-12); |dE + int Q| / |dE| = "
                  "%.3e (<= 1e-6); %.2f s (< 5 s)",
                  dynamics::to_string(tr.status), tr.times.back(), tr.states.back().x[0], rise, balance, secs)};
}

Outcome c7() {
  const auto disk = model::build_disk_damper(1.0, 1.0, 0.0, 9.81);
  dynamics::IntegratorOptions opt;
  opt.dt = 1e-4;
  const auto tr = dynamics::integrate(disk, State{{0.0}, {0.0}, 0.0}, 10.0, opt);
  const double e0 = tr.energy.front();
  double drift = 0.0;
  for (double e : tr.energy) drift = std::max(drift, std::abs(e - e0) / std::max(std::abs(e0), 1.0));
  return {tr.ok() && drift <= 1e-8, fmt("run %s at t=%.4f (needs t=10, phi=%.6f); max |E - E0| / max(|E0|,1) = %.3e "
                                        "(<= 1e-8)",
                                        dynamics::to_string(tr.status), tr.times.back(), tr.states.back().x[0], drift)};
}

Outcome c8() {
  constexpr double m = 1.0, k = 1.0, eta = 0.1, x0 = 1.0;
  const double gamma = eta / (2.0 * m);
  const double wd = std::sqrt(k / m - gamma * gamma);
  const auto ray = model::build_rayleigh_oscillator(m, k, eta);
  dynamics::IntegratorOptions opt;
  opt.dt = 1e-3;
  const auto tr = dynamics::integrate(ray, State{{x0}, {0.0}, 0.0}, 10.0 * 2.0 * pi / wd, opt);
  double worst = tr.ok() ? 0.0 : kInf;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    const double e = std::exp(-gamma * t);
    const double x = x0 * e * (std::cos(wd * t) + gamma / wd * std::sin(wd * t));
    const double v = -x0 * e * (k / m) / wd * std::sin(wd * t);
    worst = std::max({worst, std::abs(tr.states[i].x[0] - x), std::abs(tr.states[i].v[0] - v)});
  }
  return {worst <= 1e-7, fmt("max |state - closed-form damped oscillator| = %.3e (<= 1e-7) over 10 periods", worst)};
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Outcome c9() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> res;
  for (std::size_t n : {51u, 101u, 201u}) {
    continuum::BarConfig cfg{n, 1.0, continuum::DensityLaw::linear, 1000.0, 5.0, 1e4, 2.0, 1e-8};
    continuum::BarState s{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n - 1);
      s.u[i] = (i == 0 || i + 1 == n) ? 0.0 : 0.01 * std::sin(pi * x);
      s.w[i] = (i == 0 || i + 1 == n) ? 0.0 : 0.1 * std::sin(pi * x);
    }
    res.push_back(inf_norm(continuum::discrete_lagrangian_residual(s, continuum::momentum_rhs(s, cfg), cfg)));
  }
  const double order = std::min(std::log2(res[0] / res[1]), std::log2(res[1] / res[2]));

  continuum::BarConfig flat{101, 1.0, continuum::DensityLaw::linear, 1000.0, 0.0, 1e4, 2.0, 1e-8};
  continuum::BarState s{continuum::sine_mode(flat, 0.01), continuum::sine_mode(flat, 0.1), 0.0};
  const auto terms = continuum::momentum_terms(s, flat);
  double extra = 0.0;
  for (std::size_t i = 0; i < flat.nodes; ++i) extra = std::max({extra, std::abs(terms.rate_term[i]), std::abs(terms.gradient_term[i])});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {order >= 1.9 && extra == 0.0 && secs < 30.0,
          fmt("|EL residual|_inf = %.3e, %.3e, %.3e for N = 51, 101, 201, order %.3f (>= 1.9); beta=0 extra terms max "
              "%.1e (== 0); %.2f s (< 30 s)",
              res[0], res[1], res[2], order, extra, secs)};
}

Outcome c10() {
  std::vector<double> defect;
  for (std::size_t n : {51u, 101u, 201u}) {
    continuum::BarConfig cfg{n, 1.0, continuum::DensityLaw::exponential, 1000.0, 5.0, 10.0, 2.0, 1e-8};
    const continuum::BarState s{continuum::sine_mode(cfg, 0.05), continuum::sine_mode(cfg, 0.05), 0.0};
    const auto tr = continuum::integrate_bar(s, 0.5, cfg, 0.1 * cfg.dx());
    if (!tr.ok()) return {false, fmt("N=%zu run %s: %s", n, continuum::to_string(tr.status), tr.message.c_str())};
    // Independent audit: M(t) by trapezoid of rho(eps), exchange rate by
    // trapezoid of rho'(eps) eps_t, both from the stored nodal fields.
    const double h = cfg.dx();
    auto deriv = [&](const std::vector<double>& f, std::size_t i) {
      if (i == 0) return (-4.0 * f[0] + 7.0 * f[1] - 4.0 * f[2] + f[3]) / (2.0 * h);
      if (i + 1 == n) return (4.0 * f[n - 1] - 7.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (2.0 * h);
      return (f[i + 1] - f[i - 1]) / (2.0 * h);
    };
    std::vector<double> mass(tr.size()), rate(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double c = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        const double rho = 1000.0 * std::exp(5.0 * deriv(tr.u[k], i));
        mass[k] += c * rho * h;
        rate[k] += c * 5.0 * rho * deriv(tr.w[k], i) * h;
      }
    }
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
      const double dt = tr.times[k + 1] - tr.times[k];
      worst = std::max(worst, std::abs(mass[k + 1] - mass[k] - 0.5 * dt * (rate[k] + rate[k + 1])) / dt);
    }
    defect.push_back(worst);
  }
  const double order = std::min(std::log2(defect[0] / defect[1]), std::log2(defect[1] / defect[2]));

  continuum::BarConfig flat{101, 1.0, continuum::DensityLaw::linear, 1000.0, 0.0, 10.0, 2.0, 1e-8};
  const continuum::BarState s{continuum::sine_mode(flat, 0.05), continuum::sine_mode(flat, 0.05), 0.0};
  const auto tr = continuum::integrate_bar(s, 0.5, flat, 0.1 * flat.dx());
  double drift = tr.ok() ? 0.0 : kInf;
  for (double m : tr.mass) drift = std::max(drift, std::abs(m - tr.mass.front()) / tr.mass.front());
  const double eps = std::numeric_limits<double>::epsilon();
  return {order >= 1.9 && drift <= 4.0 * eps,
          fmt("defect %.3e, %.3e, %.3e for N = 51, 101, 201 (dt = 0.1 dx), order %.3f (>= 1.9); beta=0 max |M-M0|/M0 "
              "= %.1e (<= 4 eps)",
              defect[0], defect[1], defect[2], order, drift)};
}

Outcome c11() {
  const double own = c1_deviation(true);
  verify::Options o;
  o.flip_q = true;
  const auto suite = verify::run_suite("eq3-equivalence", o);
  const double harness = suite.checks.empty() ? 0.0 : suite.checks.front().measured;
  const bool ok = own >= 0.1 && harness >= 0.1 && !suite.passed;
  return {ok, fmt("flipped-q deviation %.3e here and %.3e in the verify harness (both >= 0.1, suite must fail: %s)", own,
                  harness, suite.passed ? "passed" : "failed")};
}

struct Criterion {
  const char* title;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"Eq3 equivalence (disk_damper residual vs hand-derived EOM)", c1},
    {"power identity q.v = Q", c2},
    {"Euler homogeneity shortcut", c3},
    {"Norton-Hoff closed form", c4},
    {"AD vs finite differences", c5},
    {"energy balance, disk_damper eta=0.7 on [0,10]", c6},
    {"conservative limit, disk_damper eta=0 on [0,10]", c7},
    {"damped oscillator regression", c8},
    {"variational / strong-form equivalence of the bar", c9},
    {"mass audit of the bar", c10},
    {"harness self-test (sign-flipped q)", c11},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion 1..11]\n");
      return 2;
    }
  }
  if (only < 0 || only > 11) {
    std::fprintf(stderr, "criterion must be in 1..11\n");
    return 2;
  }
  bool all = true;
  for (int k = 1; k <= 11; ++k) {
    if (only && k != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = kCriteria[k - 1].run();
    } catch (const std::exception& e) {
      o = {false, std::string("raised: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] C%d %s: %s [%.2f s]\n", o.passed ? "PASS" : "FAIL", k, kCriteria[k - 1].title, o.detail.c_str(),
                secs);
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
