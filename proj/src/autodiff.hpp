#pragma once

// Forward-mode dual arithmetic and the differentiable scalar fields built on
// it. A field body is written once, generic over the scalar type, and is
// instantiated for plain doubles, first-order duals and nested duals.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "state.hpp"

namespace vardiss::ad {

template <class T>
struct Dual {
  T val{};
  T der{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v), der(0.0) {}  // NOLINT: constants promote implicitly
  constexpr Dual(T v, T d) : val(std::move(v)), der(std::move(d)) {}

  friend constexpr Dual operator+(const Dual& a, const Dual& b) { return {a.val + b.val, a.der + b.der}; }
  friend constexpr Dual operator-(const Dual& a, const Dual& b) { return {a.val - b.val, a.der - b.der}; }
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.val * b.val, a.der * b.val + a.val * b.der};
  }
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    T q = a.val / b.val;
    return {q, (a.der - q * b.der) / b.val};
  }
  friend constexpr Dual operator-(const Dual& a) { return {-a.val, -a.der}; }
  friend constexpr Dual operator+(const Dual& a) { return a; }

  Dual& operator+=(const Dual& b) { return *this = *this + b; }
  Dual& operator-=(const Dual& b) { return *this = *this - b; }
  Dual& operator*=(const Dual& b) { return *this = *this * b; }
  Dual& operator/=(const Dual& b) { return *this = *this / b; }

  // Ordering looks at the value only; branches select a smooth piece.
  friend constexpr bool operator<(const Dual& a, const Dual& b) { return a.val < b.val; }
  friend constexpr bool operator>(const Dual& a, const Dual& b) { return a.val > b.val; }
  friend constexpr bool operator<=(const Dual& a, const Dual& b) { return a.val <= b.val; }
  friend constexpr bool operator>=(const Dual& a, const Dual& b) { return a.val >= b.val; }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.val);
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos, std::sin;
  return {sin(a.val), cos(a.val) * a.der};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos, std::sin;
  return {cos(a.val), -sin(a.val) * a.der};
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
  using std::tan;
  T t = tan(a.val);
  return {t, (1.0 + t * t) * a.der};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T e = exp(a.val);
  return {e, e * a.der};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.val), a.der / a.val};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T s = sqrt(a.val);
  return {s, a.der / (2.0 * s)};
}
template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  return {pow(a.val, p), p * pow(a.val, p - 1.0) * a.der};
}
template <class T>
Dual<T> sinh(const Dual<T>& a) {
  using std::cosh, std::sinh;
  return {sinh(a.val), cosh(a.val) * a.der};
}
template <class T>
Dual<T> cosh(const Dual<T>& a) {
  using std::cosh, std::sinh;
  return {cosh(a.val), sinh(a.val) * a.der};
}
template <class T>
Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  T th = tanh(a.val);
  return {th, (1.0 - th * th) * a.der};
}
template <class T>
Dual<T> atan(const Dual<T>& a) {
  using std::atan;
  return {atan(a.val), a.der / (1.0 + a.val * a.val)};
}
template <class T>
Dual<T> abs(const Dual<T>& a) {
  return a.val < T(0.0) ? -a : a;
}

struct FieldArity {
  std::size_t nx = 0;
  std::size_t nv = 0;
  bool has_time = false;
};

template <class S>
using FieldBody = std::function<S(std::span<const S>, std::span<const S>, const S&)>;

/// A scalar function f(x, v, t) whose body is generic over the arithmetic.
/// Bodies must be deterministic and free of side effects; they are invoked
/// with spans of length arity.nx and arity.nv (empty when nv == 0).
class ScalarField {
 public:
  ScalarField() = default;

  template <class Body>
  ScalarField(FieldArity arity, Body body)
      : arity_(arity), plain_(body), first_(body), second_(body) {}

  const FieldArity& arity() const noexcept { return arity_; }
  bool empty() const noexcept { return !plain_; }

  double operator()(std::span<const double> x, std::span<const double> v, double t) const {
    return plain_(x, v, t);
  }
  D1 operator()(std::span<const D1> x, std::span<const D1> v, const D1& t) const { return first_(x, v, t); }
  D2 operator()(std::span<const D2> x, std::span<const D2> v, const D2& t) const { return second_(x, v, t); }

 private:
  FieldArity arity_;
  FieldBody<double> plain_;
  FieldBody<D1> first_;
  FieldBody<D2> second_;
};

using Vector = std::vector<double>;
/// Row-major n x m block.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Value, first and second directional derivative along one direction.
struct DirectionalJet {
  double value = 0.0;
  double deriv = 0.0;
  double deriv2 = 0.0;
};

double eval(const ScalarField& f, const State& s);
Vector grad_x(const ScalarField& f, const State& s);
Vector grad_v(const ScalarField& f, const State& s);
/// hess_vv(i, j) = d2f / dv_i dv_j
Matrix hess_vv(const ScalarField& f, const State& s);
/// hess_vx(i, j) = d2f / dv_i dx_j
Matrix hess_vx(const ScalarField& f, const State& s);
/// Explicit partial derivative in t; zero for fields without time dependence.
double time_partial(const ScalarField& f, const State& s);
/// Jet of f(x + h dx, v + h dv, t) in h at h = 0.
DirectionalJet directional(const ScalarField& f, const State& s, std::span<const double> dx,
                           std::span<const double> dv);

}  // namespace vardiss::ad
