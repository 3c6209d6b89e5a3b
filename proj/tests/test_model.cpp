#include <doctest.h>

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "model.hpp"

using namespace vardiss;
using model::ScalarField;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::invalid_argument;
}

model::SystemSpec quadratic_spec() {
  model::SystemSpec spec;
  spec.n = 1;
  spec.kinetic = ScalarField({1, 1, false}, [](auto, auto v, const auto&) { return 0.5 * v[0] * v[0]; });
  spec.gibbs = ScalarField({1, 0, false}, [](auto x, auto, const auto&) { return 0.5 * x[0] * x[0]; });
  spec.dissipation = ScalarField({1, 1, false}, [](auto, auto v, const auto&) { return v[0] * v[0]; });
  spec.box = {{-1.0}, {1.0}, {-1.0}, {1.0}};
  return spec;
}

}  // namespace

TEST_CASE("disk_damper potentials at a sample state") {
  const auto disk = model::build_disk_damper(2.0, 0.5, 0.7, 9.81);
  const State s{{0.3}, {1.7}, 0.0};
  CHECK(ad::eval(disk.kinetic(), s) == doctest::Approx(2.0 * 0.25 * (1 + std::sin(0.3)) * 1.7 * 1.7));
  CHECK(ad::eval(disk.gibbs(), s) == doctest::Approx(2.0 * 9.81 * 0.5 * std::sin(0.3)));
  const double c = 1 + std::cos(0.3);
  CHECK(ad::eval(disk.dissipation(), s) == doctest::Approx(0.7 * 0.25 * c * c * 1.7 * 1.7));
  CHECK(disk.labels() == std::vector<std::string>{"phi"});
  CHECK(disk.id() == "disk_damper");
  CHECK(disk.parameters().at("eta") == 0.7);
}

TEST_CASE("disk_damper rejects nonphysical parameters") {
  CHECK(kind_of([] { model::build_disk_damper(0.0, 1.0, 0.7, 9.81); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { model::build_disk_damper(1.0, -1.0, 0.7, 9.81); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { model::build_disk_damper(1.0, 1.0, -0.1, 9.81); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { model::build_disk_damper(1.0, 1.0, 0.7, NAN); }) == ErrorKind::invalid_argument);
  CHECK_NOTHROW(model::build_disk_damper(1.0, 1.0, 0.0, 0.0));
}

TEST_CASE("built-in lookup is strict about parameter names") {
  const model::ParameterMap ok{{"m", 1.0}, {"k", 4.0}, {"eta", 0.2}};
  CHECK(model::build_builtin("rayleigh_oscillator", ok).dim() == 1);

  auto extra = ok;
  extra["zeta"] = 1.0;
  CHECK(kind_of([&] { model::build_builtin("rayleigh_oscillator", extra); }) == ErrorKind::invalid_argument);

  auto missing = ok;
  missing.erase("k");
  CHECK(kind_of([&] { model::build_builtin("rayleigh_oscillator", missing); }) == ErrorKind::invalid_argument);

  CHECK(kind_of([&] { model::build_builtin("pendulum", ok); }) == ErrorKind::invalid_argument);
  CHECK(model::builtin_ids().size() == 2);
  CHECK(model::builtin_parameter_names("disk_damper") == std::vector<std::string>{"m", "r", "eta", "g"});
}

TEST_CASE("construction rejects a negative dissipation function") {
  auto spec = quadratic_spec();
  spec.dissipation = ScalarField({1, 1, false}, [](auto x, auto v, const auto&) { return x[0] * v[0] * v[0]; });
  CHECK(kind_of([&] { model::SystemModel m(spec); }) == ErrorKind::invalid_argument);
}

TEST_CASE("construction rejects dissipation that does not vanish at rest") {
  auto spec = quadratic_spec();
  spec.dissipation = ScalarField({1, 1, false}, [](auto, auto v, const auto&) { return v[0] * v[0] + 1e-3; });
  CHECK(kind_of([&] { model::SystemModel m(spec); }) == ErrorKind::invalid_argument);
}

TEST_CASE("construction rejects rate-independent dissipation") {
  auto spec = quadratic_spec();
  spec.dissipation = ScalarField({1, 1, false}, [](auto, auto v, const auto&) {
    using std::sqrt;
    using S = typename decltype(v)::value_type;
    return sqrt(v[0] * v[0] + S(1e-300));
  });
  CHECK(kind_of([&] { model::SystemModel m(spec); }) == ErrorKind::invalid_argument);
}

TEST_CASE("construction validates arities, labels and the sample box") {
  auto spec = quadratic_spec();
  spec.kinetic = ScalarField({2, 2, false}, [](auto, auto v, const auto&) { return v[0] * v[1]; });
  CHECK(kind_of([&] { model::SystemModel m(spec); }) == ErrorKind::dimension_mismatch);

  spec = quadratic_spec();
  spec.labels = {"a", "b"};
  CHECK(kind_of([&] { model::SystemModel m(spec); }) == ErrorKind::invalid_argument);

  spec = quadratic_spec();
  spec.box.v_lo = {2.0};
  CHECK(kind_of([&] { model::SystemModel m(spec); }) == ErrorKind::invalid_argument);

  spec = quadratic_spec();
  const model::SystemModel m(spec);
  CHECK(m.labels() == std::vector<std::string>{"x0"});
}

TEST_CASE("check_state reports wrong sizes and non-finite entries") {
  const auto ray = model::build_rayleigh_oscillator(1.0, 1.0, 0.1);
  CHECK(kind_of([&] { ray.check_state(State{{1.0, 2.0}, {0.0}, 0.0}); }) == ErrorKind::dimension_mismatch);
  CHECK(kind_of([&] { ray.check_state(State{{INFINITY}, {0.0}, 0.0}); }) == ErrorKind::invalid_argument);
  CHECK_NOTHROW(ray.check_state(State{{1.0}, {0.0}, 0.0}));
}
