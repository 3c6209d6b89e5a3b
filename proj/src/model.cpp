#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "tep.hpp"

namespace vardiss::model {
namespace {

// Number of samples (among the first with Q > 0) on which the homogeneity
// degree is probed for the degree <= 1 rejection.
constexpr std::size_t kHomogeneityProbes = 16;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::invalid_argument, what);
}

void check_box(const std::vector<double>& lo, const std::vector<double>& hi, std::size_t n, const char* name) {
  require(lo.size() == n && hi.size() == n, std::string("sample box ") + name + " bounds must have n entries");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] <= hi[i],
            std::string("sample box ") + name + " bounds must be finite and ordered");
  }
}

std::string describe(const State& s) {
  std::ostringstream os;
  os.precision(17);
  os << "x=[";
  for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? "," : "") << s.x[i];
  os << "] v=[";
  for (std::size_t i = 0; i < s.v.size(); ++i) os << (i ? "," : "") << s.v[i];
  os << "]";
  return os.str();
}

}  // namespace

SystemModel::SystemModel(SystemSpec spec, const ModelValidation& validation) : spec_(std::move(spec)) {
  const std::size_t n = spec_.n;
  require(n > 0, "system dimension must be positive");
  require(!spec_.kinetic.empty() && !spec_.gibbs.empty() && !spec_.dissipation.empty(),
          "kinetic energy, Gibbs energy and dissipation function are all required");
  const auto& ka = spec_.kinetic.arity();
  const auto& ga = spec_.gibbs.arity();
  const auto& qa = spec_.dissipation.arity();
  if (ka.nx != n || ka.nv != n || ga.nx != n || (ga.nv != 0 && ga.nv != n) || qa.nx != n || qa.nv != n) {
    throw Error(ErrorKind::dimension_mismatch, "field arities do not match the system dimension");
  }
  require(!ka.has_time && !qa.has_time, "kinetic energy and dissipation must not depend explicitly on time");
  if (spec_.labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) spec_.labels.push_back("x" + std::to_string(i));
  }
  require(spec_.labels.size() == n, "one label per coordinate is required");
  check_box(spec_.box.x_lo, spec_.box.x_hi, n, "x");
  check_box(spec_.box.v_lo, spec_.box.v_hi, n, "v");

  CounterRng rng(validation.seed);
  std::size_t probes = 0;
  State s{std::vector<double>(n), std::vector<double>(n), 0.0};
  for (std::size_t k = 0; k < validation.samples; ++k) {
    for (std::size_t i = 0; i < n; ++i) s.x[i] = rng.uniform(spec_.box.x_lo[i], spec_.box.x_hi[i]);
    for (std::size_t i = 0; i < n; ++i) s.v[i] = rng.uniform(spec_.box.v_lo[i], spec_.box.v_hi[i]);
    const double q = ad::eval(spec_.dissipation, s);
    if (!std::isfinite(q) || q < -1e-14 * (1.0 + std::abs(q))) {
      throw Error(ErrorKind::invalid_argument, "dissipation function is negative or non-finite at " + describe(s));
    }
    State rest{s.x, std::vector<double>(n, 0.0), 0.0};
    if (std::abs(ad::eval(spec_.dissipation, rest)) > 1e-14) {
      throw Error(ErrorKind::invalid_argument, "dissipation function does not vanish at rest at " + describe(rest));
    }
    if (q > 0.0 && probes < kHomogeneityProbes) {
      ++probes;
      if (const auto deg = tep::homogeneity_degree(spec_.dissipation, s); deg && *deg <= 1.0 + 1e-8) {
        throw Error(ErrorKind::invalid_argument,
                    "dissipation function is homogeneous of degree " + std::to_string(*deg) +
                        " <= 1 in the rates; only superlinear dissipation is supported");
      }
    }
  }
}

void SystemModel::check_state(const State& s) const {
  if (s.x.size() != spec_.n || s.v.size() != spec_.n) {
    throw Error(ErrorKind::dimension_mismatch, "state has " + std::to_string(s.x.size()) + "/" +
                                                   std::to_string(s.v.size()) + " entries, system dimension is " +
                                                   std::to_string(spec_.n));
  }
  for (std::size_t i = 0; i < spec_.n; ++i) {
    if (!std::isfinite(s.x[i]) || !std::isfinite(s.v[i])) {
      throw Error(ErrorKind::invalid_argument, "state has non-finite entries: " + describe(s));
    }
  }
  if (!std::isfinite(s.t)) throw Error(ErrorKind::invalid_argument, "state time is not finite");
}

SystemModel build_disk_damper(double m, double r, double eta, double g) {
  require(std::isfinite(m) && m > 0.0, "disk_damper: m must be positive");
  require(std::isfinite(r) && r > 0.0, "disk_damper: r must be positive");
  require(std::isfinite(eta) && eta >= 0.0, "disk_damper: eta must be nonnegative");
  require(std::isfinite(g) && g >= 0.0, "disk_damper: g must be nonnegative");

  SystemSpec spec;
  spec.n = 1;
  spec.kinetic = ScalarField({1, 1, false}, [m, r](auto x, auto v, const auto&) {
    using S = typename decltype(x)::value_type;
    using std::sin;
    return S(m * r * r) * (S(1.0) + sin(x[0])) * v[0] * v[0];
  });
  spec.gibbs = ScalarField({1, 0, false}, [m, r, g](auto x, auto, const auto&) {
    using S = typename decltype(x)::value_type;
    using std::sin;
    return S(m * g * r) * sin(x[0]);
  });
  spec.dissipation = ScalarField({1, 1, false}, [r, eta](auto x, auto v, const auto&) {
    using S = typename decltype(x)::value_type;
    using std::cos;
    const S c = S(1.0) + cos(x[0]);
    return S(eta * r * r) * c * c * v[0] * v[0];
  });
  spec.labels = {"phi"};
  spec.box = {{-std::numbers::pi}, {std::numbers::pi}, {-10.0}, {10.0}};
  spec.id = "disk_damper";
  spec.parameters = {{"m", m}, {"r", r}, {"eta", eta}, {"g", g}};
  return SystemModel(std::move(spec));
}

SystemModel build_rayleigh_oscillator(double m, double k, double eta) {
  require(std::isfinite(m) && m > 0.0, "rayleigh_oscillator: m must be positive");
  require(std::isfinite(k) && k >= 0.0, "rayleigh_oscillator: k must be nonnegative");
  require(std::isfinite(eta) && eta >= 0.0, "rayleigh_oscillator: eta must be nonnegative");

  SystemSpec spec;
  spec.n = 1;
  spec.kinetic = ScalarField({1, 1, false}, [m](auto, auto v, const auto&) {
    using S = typename decltype(v)::value_type;
    return S(0.5 * m) * v[0] * v[0];
  });
  spec.gibbs = ScalarField({1, 0, false}, [k](auto x, auto, const auto&) {
    using S = typename decltype(x)::value_type;
    return S(0.5 * k) * x[0] * x[0];
  });
  spec.dissipation = ScalarField({1, 1, false}, [eta](auto, auto v, const auto&) {
    using S = typename decltype(v)::value_type;
    return S(eta) * v[0] * v[0];
  });
  spec.labels = {"x"};
  spec.box = {{-10.0}, {10.0}, {-10.0}, {10.0}};
  spec.id = "rayleigh_oscillator";
  spec.parameters = {{"m", m}, {"k", k}, {"eta", eta}};
  return SystemModel(std::move(spec));
}

std::vector<std::string> builtin_ids() { return {"disk_damper", "rayleigh_oscillator"}; }

std::vector<std::string> builtin_parameter_names(std::string_view id) {
  if (id == "disk_damper") return {"m", "r", "eta", "g"};
  if (id == "rayleigh_oscillator") return {"m", "k", "eta"};
  throw Error(ErrorKind::invalid_argument, "unknown built-in system '" + std::string(id) + "'");
}

SystemModel build_builtin(std::string_view id, const ParameterMap& params) {
  const auto names = builtin_parameter_names(id);
  for (const auto& [name, value] : params) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw Error(ErrorKind::invalid_argument,
                  "unknown parameter '" + name + "' for built-in system '" + std::string(id) + "'");
    }
  }
  auto get = [&](const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) {
      throw Error(ErrorKind::invalid_argument,
                  "missing parameter '" + name + "' for built-in system '" + std::string(id) + "'");
    }
    return it->second;
  };
  if (id == "disk_damper") return build_disk_damper(get("m"), get("r"), get("eta"), get("g"));
  return build_rayleigh_oscillator(get("m"), get("k"), get("eta"));
}

}  // namespace vardiss::model
