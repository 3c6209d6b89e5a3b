#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "autodiff.hpp"
#include "rng.hpp"
#include "state.hpp"

namespace vardiss::model {

using ad::ScalarField;
using ParameterMap = std::map<std::string, double, std::less<>>;

/// Axis-aligned box the dissipation function is sampled in at construction.
struct SampleBox {
  std::vector<double> x_lo, x_hi;
  std::vector<double> v_lo, v_hi;
};

struct ModelValidation {
  std::size_t samples = 10000;
  std::uint64_t seed = kDefaultSeed;
};

/// Everything needed to describe a system: kinetic energy K(x, v), Gibbs
/// energy G(x, t) and dissipation function Q(x, v) over n coordinates.
struct SystemSpec {
  std::size_t n = 0;
  ScalarField kinetic;
  ScalarField gibbs;
  ScalarField dissipation;
  std::vector<std::string> labels;
  SampleBox box;
  std::string id = "custom";
  ParameterMap parameters;
};

class SystemModel {
 public:
  /// Validates arities and labels, then samples Q in `spec.box`: Q(x, 0) must
  /// vanish and Q must be nonnegative. A Q that is homogeneous of degree <= 1
  /// in the rates is rejected (rate-independent dissipation is unsupported).
  explicit SystemModel(SystemSpec spec, const ModelValidation& validation = {});

  std::size_t dim() const noexcept { return spec_.n; }
  const ScalarField& kinetic() const noexcept { return spec_.kinetic; }
  const ScalarField& gibbs() const noexcept { return spec_.gibbs; }
  const ScalarField& dissipation() const noexcept { return spec_.dissipation; }
  const std::vector<std::string>& labels() const noexcept { return spec_.labels; }
  const std::string& id() const noexcept { return spec_.id; }
  const ParameterMap& parameters() const noexcept { return spec_.parameters; }

  /// Throws on dimension mismatch or non-finite entries.
  void check_state(const State& s) const;

 private:
  SystemSpec spec_;
};

/// Point mass on a massless disk with a horizontal damper; coordinate "phi".
///   K = m r^2 (1 + sin phi) phidot^2,  G = m g r sin phi,
///   Q = eta r^2 (1 + cos phi)^2 phidot^2.
/// The mass matrix vanishes at phi = -pi/2; that state is representable but
/// cannot be solved for accelerations.
SystemModel build_disk_damper(double m, double r, double eta, double g);

/// Linear damped oscillator K = m v^2 / 2, G = k x^2 / 2, Q = eta v^2.
SystemModel build_rayleigh_oscillator(double m, double k, double eta);

/// Builds a built-in system from its id and a complete parameter map.
/// Unknown ids, unknown names and missing names are rejected.
SystemModel build_builtin(std::string_view id, const ParameterMap& params);

std::vector<std::string> builtin_ids();
std::vector<std::string> builtin_parameter_names(std::string_view id);

}  // namespace vardiss::model
