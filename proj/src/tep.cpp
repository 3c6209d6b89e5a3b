#include "tep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace vardiss::tep {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void check_rates(const ad::ScalarField& dissipation, const State& s) {
  if (dissipation.arity().nv != s.v.size()) {
    throw Error(ErrorKind::dimension_mismatch, "dissipation function arity does not match the number of rates");
  }
}

}  // namespace

DissipativeForce dissipative_force(const ad::ScalarField& dissipation, const State& s) {
  check_rates(dissipation, s);
  DissipativeForce out;
  out.q.assign(s.v.size(), 0.0);
  if (norm(s.v) < kQuiescentRate * (1.0 + norm(s.x))) return out;

  const double value = ad::eval(dissipation, s);
  const std::vector<double> slope = ad::grad_v(dissipation, s);
  const double den = dot(slope, s.v);
  if (!(std::abs(den) > kDenominatorEps * (1.0 + std::abs(value)))) {
    const double v2 = dot(s.v, s.v);
    if (std::abs(value) <= kDenominatorEps * (1.0 + v2)) return out;
    throw Error(ErrorKind::singular_dissipation,
                "dQ/dv . v vanishes at a state with Q = " + std::to_string(value) + " (ill-posed dissipation)");
  }
  const double scale = value / den;
  for (std::size_t i = 0; i < out.q.size(); ++i) out.q[i] = scale * slope[i];
  out.power = dot(out.q, s.v);
  return out;
}

std::optional<double> homogeneity_degree(const ad::ScalarField& dissipation, const State& s) {
  check_rates(dissipation, s);
  auto ratio = [&](double lambda) -> std::optional<double> {
    State scaled = s;
    for (double& vi : scaled.v) vi *= lambda;
    const double value = ad::eval(dissipation, scaled);
    if (value == 0.0 || !std::isfinite(value)) return std::nullopt;
    const double r = dot(ad::grad_v(dissipation, scaled), scaled.v) / value;
    if (!std::isfinite(r)) return std::nullopt;
    return r;
  };
  const auto base = ratio(1.0);
  if (!base) return std::nullopt;
  for (double lambda : {0.5, 2.0}) {
    const auto other = ratio(lambda);
    if (!other || std::abs(*other - *base) > 1e-8 * std::abs(*base)) return std::nullopt;
  }
  return base;
}

std::vector<double> euler_force(const ad::ScalarField& dissipation, const State& s, double degree) {
  check_rates(dissipation, s);
  std::vector<double> g = ad::grad_v(dissipation, s);
  for (double& gi : g) gi /= degree;
  return g;
}

PowerIdentityReport verify_power_identity(const ad::ScalarField& dissipation, std::span<const State> states,
                                          double threshold) {
  if (states.empty()) throw Error(ErrorKind::invalid_argument, "power identity needs at least one state");
  PowerIdentityReport report;
  report.threshold = threshold;
  report.samples = states.size();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double value = ad::eval(dissipation, states[k]);
    const DissipativeForce f = dissipative_force(dissipation, states[k]);
    const double dev = std::abs(f.power - value) / (1.0 + std::abs(value));
    if (dev > report.max_deviation || !std::isfinite(dev)) {
      report.max_deviation = std::isfinite(dev) ? dev : INFINITY;
      report.worst_index = k;
    }
  }
  report.passed = report.max_deviation <= threshold;
  return report;
}

ad::ScalarField norton_hoff_dissipation(double alpha, double exponent, std::size_t n) {
  if (!(alpha > 0.0) || !(exponent > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "Norton-Hoff dissipation needs alpha > 0 and exponent > 0");
  }
  return ad::ScalarField({n, n, false}, [alpha, exponent](auto /*x*/, auto v, const auto& /*t*/) {
    using S = typename decltype(v)::value_type;
    using std::pow;
    S sq = 0.0;
    for (const S& vi : v) sq += vi * vi;
    return S(alpha) * pow(sq, 0.5 * exponent);
  });
}

std::vector<double> norton_hoff_stress(double alpha, double exponent, std::span<const double> v) {
  const double n = norm(v);
  std::vector<double> out(v.size(), 0.0);
  if (n == 0.0) return out;
  const double scale = alpha * std::pow(n, exponent - 2.0);
  std::transform(v.begin(), v.end(), out.begin(), [scale](double vi) { return scale * vi; });
  return out;
}

}  // namespace vardiss::tep
