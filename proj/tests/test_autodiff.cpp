#include <doctest.h>

#include <cmath>
#include <numbers>

#include "autodiff.hpp"
#include "error.hpp"
#include "rng.hpp"

using namespace vardiss;
using ad::D1;
using ad::D2;

namespace {

// Seed x for value, first and second derivative at once: {{x, 1}, {1, 0}}.
D2 jet(double x) { return D2{D1{x, 1.0}, D1{1.0, 0.0}}; }

double first(const D2& y) { return y.val.der; }
double second(const D2& y) { return y.der.der; }

}  // namespace

TEST_CASE("dual arithmetic carries first derivatives") {
  const D1 x{3.0, 1.0};
  const D1 y = x * x * x - D1(2.0) * x;  // 3x^2 - 2
  CHECK(y.val == doctest::Approx(21.0));
  CHECK(y.der == doctest::Approx(25.0));

  const D1 q = D1(1.0) / x;
  CHECK(q.der == doctest::Approx(-1.0 / 9.0));
}

TEST_CASE("nested duals give second derivatives of elementary functions") {
  const double x0 = 0.7;
  const D2 x = jet(x0);

  const D2 s = sin(x);
  CHECK(first(s) == doctest::Approx(std::cos(x0)));
  CHECK(second(s) == doctest::Approx(-std::sin(x0)));

  const D2 e = exp(x * x);
  CHECK(first(e) == doctest::Approx(2 * x0 * std::exp(x0 * x0)));
  CHECK(second(e) == doctest::Approx((2 + 4 * x0 * x0) * std::exp(x0 * x0)));

  const D2 l = log(x);
  CHECK(second(l) == doctest::Approx(-1.0 / (x0 * x0)));

  const D2 p = pow(x, 2.5);
  CHECK(first(p) == doctest::Approx(2.5 * std::pow(x0, 1.5)));
  CHECK(second(p) == doctest::Approx(3.75 * std::pow(x0, 0.5)));

  const D2 r = sqrt(x);
  CHECK(second(r) == doctest::Approx(-0.25 * std::pow(x0, -1.5)));

  const D2 t = tanh(x);
  const double th = std::tanh(x0);
  CHECK(first(t) == doctest::Approx(1 - th * th));
  CHECK(second(t) == doctest::Approx(-2 * th * (1 - th * th)));

  const D2 a = atan(x);
  CHECK(first(a) == doctest::Approx(1 / (1 + x0 * x0)));
}

TEST_CASE("comparisons look at the primal value only") {
  CHECK(D1{1.0, 5.0} < D1{2.0, -5.0});
  CHECK(abs(D1{-2.0, 3.0}).der == doctest::Approx(-3.0));
}

TEST_CASE("scalar field gradients and Hessian blocks of a coupled field") {
  // f = x0^2 v1 + sin(x1) v0^2 + t v0
  const ad::ScalarField f({2, 2, true}, [](auto x, auto v, const auto& t) {
    using std::sin;
    return x[0] * x[0] * v[1] + sin(x[1]) * v[0] * v[0] + t * v[0];
  });
  const State s{{1.5, 0.4}, {-0.8, 2.0}, 0.3};

  CHECK(ad::eval(f, s) == doctest::Approx(1.5 * 1.5 * 2.0 + std::sin(0.4) * 0.64 + 0.3 * -0.8));

  const auto gx = ad::grad_x(f, s);
  CHECK(gx[0] == doctest::Approx(2 * 1.5 * 2.0));
  CHECK(gx[1] == doctest::Approx(std::cos(0.4) * 0.64));

  const auto gv = ad::grad_v(f, s);
  CHECK(gv[0] == doctest::Approx(2 * std::sin(0.4) * -0.8 + 0.3));
  CHECK(gv[1] == doctest::Approx(1.5 * 1.5));

  const auto hvv = ad::hess_vv(f, s);
  CHECK(hvv(0, 0) == doctest::Approx(2 * std::sin(0.4)));
  CHECK(hvv(0, 1) == doctest::Approx(0.0));
  CHECK(hvv(1, 1) == doctest::Approx(0.0));

  const auto hvx = ad::hess_vx(f, s);  // d2f / dv_i dx_j
  CHECK(hvx(0, 0) == doctest::Approx(0.0));
  CHECK(hvx(0, 1) == doctest::Approx(2 * std::cos(0.4) * -0.8));
  CHECK(hvx(1, 0) == doctest::Approx(2 * 1.5));
  CHECK(hvx(1, 1) == doctest::Approx(0.0));

  CHECK(ad::time_partial(f, s) == doctest::Approx(-0.8));
}

TEST_CASE("time partial vanishes for autonomous fields") {
  const ad::ScalarField f({1, 1, false}, [](auto x, auto v, const auto&) { return x[0] * v[0]; });
  CHECK(ad::time_partial(f, State{{2.0}, {3.0}, 7.0}) == 0.0);
}

TEST_CASE("directional jet matches the restriction to a line") {
  const ad::ScalarField f({1, 1, false}, [](auto x, auto v, const auto&) {
    using std::cos;
    return cos(x[0]) * v[0] * v[0];
  });
  const State s{{0.3}, {1.2}, 0.0};
  const std::vector<double> dx{0.5}, dv{-1.0};
  const auto j = ad::directional(f, s, dx, dv);
  // g(h) = cos(0.3 + 0.5h) (1.2 - h)^2
  const double c = std::cos(0.3), sn = std::sin(0.3);
  CHECK(j.value == doctest::Approx(c * 1.44));
  CHECK(j.deriv == doctest::Approx(-0.5 * sn * 1.44 + c * 2 * 1.2 * -1.0));
  CHECK(j.deriv2 == doctest::Approx(-0.25 * c * 1.44 + 2 * (-0.5 * sn) * (-2.4) + 2 * c));
}

TEST_CASE("fields without rates accept states with any rate vector") {
  const ad::ScalarField g({1, 0, false}, [](auto x, auto, const auto&) { return x[0] * x[0] * x[0]; });
  CHECK(ad::grad_x(g, State{{2.0}, {}, 0.0})[0] == doctest::Approx(12.0));
  CHECK(ad::grad_x(g, State{{2.0}, {9.0}, 0.0})[0] == doctest::Approx(12.0));
}

TEST_CASE("dimension mismatches are reported") {
  const ad::ScalarField f({2, 2, false}, [](auto x, auto v, const auto&) { return x[0] * v[1]; });
  try {
    ad::grad_v(f, State{{1.0}, {1.0, 2.0}, 0.0});
    FAIL("expected a dimension mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }
}

TEST_CASE("property: AD matches central differences on seeded random fields") {
  // Random trigonometric-polynomial fields in two coordinates and two rates.
  CounterRng rng(kDefaultSeed);
  for (int trial = 0; trial < 25; ++trial) {
    double c[6];
    for (double& ci : c) ci = rng.uniform(-2.0, 2.0);
    const ad::ScalarField f({2, 2, false}, [c](auto x, auto v, const auto&) {
      using std::cos, std::exp, std::sin;
      using S = typename decltype(x)::value_type;
      return S(c[0]) * sin(x[0] * S(c[1])) * v[0] * v[1] + S(c[2]) * exp(S(0.3) * x[1]) * v[1] * v[1] +
             S(c[3]) * cos(x[0] + x[1]) * v[0] * v[0] * v[0] + S(c[4]) * x[0] * x[1] + S(c[5]) * v[0];
    });
    const State s{{rng.uniform(-1, 1), rng.uniform(-1, 1)}, {rng.uniform(-2, 2), rng.uniform(-2, 2)}, 0.0};
    constexpr double h = 1e-6;
    auto moved = [&](bool in_x, std::size_t i, double d) {
      State t = s;
      (in_x ? t.x : t.v)[i] += d;
      return t;
    };
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)); };

    const auto gx = ad::grad_x(f, s);
    const auto gv = ad::grad_v(f, s);
    const auto hvv = ad::hess_vv(f, s);
    const auto hvx = ad::hess_vx(f, s);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(close(gx[i], (ad::eval(f, moved(true, i, h)) - ad::eval(f, moved(true, i, -h))) / (2 * h)));
      CHECK(close(gv[i], (ad::eval(f, moved(false, i, h)) - ad::eval(f, moved(false, i, -h))) / (2 * h)));
      for (std::size_t j = 0; j < 2; ++j) {
        const double fd_vv = (ad::grad_v(f, moved(false, j, h))[i] - ad::grad_v(f, moved(false, j, -h))[i]) / (2 * h);
        const double fd_vx = (ad::grad_v(f, moved(true, j, h))[i] - ad::grad_v(f, moved(true, j, -h))[i]) / (2 * h);
        CHECK(close(hvv(i, j), fd_vv));
        CHECK(close(hvx(i, j), fd_vx));
      }
    }
    CHECK(hvv(0, 1) == doctest::Approx(hvv(1, 0)));
  }
}
