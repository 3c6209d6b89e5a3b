#include "autodiff.hpp"

#include <string>

#include "error.hpp"

namespace vardiss::ad {
namespace {

void check_dims(const ScalarField& f, const State& s) {
  if (f.empty()) throw Error(ErrorKind::invalid_argument, "scalar field has no body");
  const FieldArity& a = f.arity();
  if (s.x.size() != a.nx || (a.nv > 0 && s.v.size() != a.nv)) {
    throw Error(ErrorKind::dimension_mismatch,
                "state dimensions (x=" + std::to_string(s.x.size()) + ", v=" + std::to_string(s.v.size()) +
                    ") do not match field arity (x=" + std::to_string(a.nx) + ", v=" + std::to_string(a.nv) + ")");
  }
}

std::span<const double> rates(const ScalarField& f, const State& s) {
  return f.arity().nv == 0 ? std::span<const double>{} : std::span<const double>(s.v);
}

// Promote plain values to duals; entry `seed` (if any) gets unit derivative.
std::vector<D1> lift1(std::span<const double> values, std::size_t seed = SIZE_MAX) {
  std::vector<D1> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = D1{values[k], k == seed ? 1.0 : 0.0};
  return out;
}

// Nested lift: `inner` seeds the first-level direction, `outer` the second.
std::vector<D2> lift2(std::span<const double> values, std::size_t inner, std::size_t outer) {
  std::vector<D2> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out[k] = D2{D1{values[k], k == inner ? 1.0 : 0.0}, D1{k == outer ? 1.0 : 0.0, 0.0}};
  }
  return out;
}

}  // namespace

double eval(const ScalarField& f, const State& s) {
  check_dims(f, s);
  return f(std::span<const double>(s.x), rates(f, s), s.t);
}

Vector grad_x(const ScalarField& f, const State& s) {
  check_dims(f, s);
  const auto v = lift1(rates(f, s));
  const D1 t{s.t, 0.0};
  Vector g(s.x.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = lift1(s.x, i);
    g[i] = f(std::span<const D1>(x), std::span<const D1>(v), t).der;
  }
  return g;
}

Vector grad_v(const ScalarField& f, const State& s) {
  check_dims(f, s);
  const auto x = lift1(s.x);
  const auto r = rates(f, s);
  const D1 t{s.t, 0.0};
  Vector g(r.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto v = lift1(r, i);
    g[i] = f(std::span<const D1>(x), std::span<const D1>(v), t).der;
  }
  return g;
}

Matrix hess_vv(const ScalarField& f, const State& s) {
  check_dims(f, s);
  const auto r = rates(f, s);
  const auto x = lift2(s.x, SIZE_MAX, SIZE_MAX);
  const D2 t{D1{s.t, 0.0}, D1{0.0, 0.0}};
  Matrix h(r.size(), r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      const auto v = lift2(r, i, j);
      h(i, j) = f(std::span<const D2>(x), std::span<const D2>(v), t).der.der;
    }
  }
  return h;
}

Matrix hess_vx(const ScalarField& f, const State& s) {
  check_dims(f, s);
  const auto r = rates(f, s);
  const D2 t{D1{s.t, 0.0}, D1{0.0, 0.0}};
  Matrix h(r.size(), s.x.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto v = lift2(r, i, SIZE_MAX);
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      const auto x = lift2(s.x, SIZE_MAX, j);
      h(i, j) = f(std::span<const D2>(x), std::span<const D2>(v), t).der.der;
    }
  }
  return h;
}

double time_partial(const ScalarField& f, const State& s) {
  check_dims(f, s);
  if (!f.arity().has_time) return 0.0;
  const auto x = lift1(s.x);
  const auto v = lift1(rates(f, s));
  return f(std::span<const D1>(x), std::span<const D1>(v), D1{s.t, 1.0}).der;
}

DirectionalJet directional(const ScalarField& f, const State& s, std::span<const double> dx,
                           std::span<const double> dv) {
  check_dims(f, s);
  const auto r = rates(f, s);
  if (dx.size() != s.x.size() || dv.size() != r.size()) {
    throw Error(ErrorKind::dimension_mismatch, "direction does not match state dimensions");
  }
  auto seeded = [](std::span<const double> values, std::span<const double> dir) {
    std::vector<D2> out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = D2{D1{values[k], dir[k]}, D1{dir[k], 0.0}};
    return out;
  };
  const auto x = seeded(s.x, dx);
  const auto v = seeded(r, dv);
  const D2 res = f(std::span<const D2>(x), std::span<const D2>(v), D2{D1{s.t, 0.0}, D1{0.0, 0.0}});
  return {res.val.val, res.val.der, res.der.der};
}

}  // namespace vardiss::ad
