#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vardiss {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  singular_dissipation,
  degenerate_mass,
  stiffness,
  instability,
  density_collapse,
  unknown_suite,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the kinetic-energy Hessian is singular or indefinite.
/// Carries the offending state so callers can report where it happened.
class DegenerateMassError : public Error {
 public:
  DegenerateMassError(const std::string& what, std::vector<double> x, std::vector<double> v, double t)
      : Error(ErrorKind::degenerate_mass, what), x(std::move(x)), v(std::move(v)), t(t) {}
  std::vector<double> x, v;
  double t;
};

class DensityCollapseError : public Error {
 public:
  DensityCollapseError(const std::string& what, std::size_t node)
      : Error(ErrorKind::density_collapse, what), node(node) {}
  std::size_t node;
};

}  // namespace vardiss
