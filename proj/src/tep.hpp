#pragma once

// Dissipative force from a dissipation function by maximizing dissipation
// under the power constraint:
//
//   q = Q / (dQ/dv . v) * dQ/dv,     so that q . v = Q.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "autodiff.hpp"
#include "state.hpp"

namespace vardiss::tep {

/// Denominator regularity threshold: |dQ/dv . v| <= kDenominatorEps (1 + |Q|)
/// counts as singular.
inline constexpr double kDenominatorEps = 1e-14;
/// Rates with |v| < kQuiescentRate (1 + |x|) are treated as at rest.
inline constexpr double kQuiescentRate = 1e-12;

struct DissipativeForce {
  std::vector<double> q;
  double power = 0.0;  ///< q . v
};

/// Throws Error(singular_dissipation) when the denominator vanishes while Q
/// does not. At rest, or when both vanish, returns q = 0.
DissipativeForce dissipative_force(const ad::ScalarField& dissipation, const State& s);

/// Degree of homogeneity of Q in the rates at s, from Euler's relation
/// (dQ/dv . v) / Q, if that ratio is unchanged under v -> 0.5 v and v -> 2 v.
std::optional<double> homogeneity_degree(const ad::ScalarField& dissipation, const State& s);

/// (1 / degree) dQ/dv: equals the dissipative force for homogeneous Q.
std::vector<double> euler_force(const ad::ScalarField& dissipation, const State& s, double degree);

struct PowerIdentityReport {
  double max_deviation = 0.0;  ///< max |q.v - Q| / (1 + |Q|)
  double threshold = 1e-12;
  std::size_t samples = 0;
  std::size_t worst_index = 0;
  bool passed = true;
};

PowerIdentityReport verify_power_identity(const ad::ScalarField& dissipation, std::span<const State> states,
                                          double threshold = 1e-12);

/// Norton-Hoff dissipation Q = alpha |v|^exponent on n rates (Euclidean norm;
/// Frobenius for a flattened tensor).
ad::ScalarField norton_hoff_dissipation(double alpha, double exponent, std::size_t n);

/// Closed-form Norton-Hoff stress alpha |v|^(exponent - 2) v.
std::vector<double> norton_hoff_stress(double alpha, double exponent, std::span<const double> v);

}  // namespace vardiss::tep
