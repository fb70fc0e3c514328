#include <doctest.h>

#include <cmath>
#include <numbers>

#include "eqweyl/errors.hpp"
#include "eqweyl/geometry.hpp"
#include "eqweyl/quadrature.hpp"

using namespace eqweyl;
using std::numbers::pi;

TEST_SUITE("geometry") {
  TEST_CASE("built-in catalog validates") {
    for (const auto& name : builtin_names()) {
      CAPTURE(name);
      CHECK_NOTHROW(validate(builtin_model(name)));
    }
    CHECK_THROWS_AS(builtin_model("klein_bottle"), UnknownModel);
  }

  TEST_CASE("sphere profile and action") {
    const auto m = builtin_model("sphere");
    CHECK(m.a(pi / 2) == doctest::Approx(1.0));
    const auto p = action_profile(m);
    CHECK(p.kappa == 1);
    CHECK(p.Lambda == 2);
    REQUIRE(p.fixed_points.size() == 2);
    CHECK(p.fixed_points[0] == 0.0);
    CHECK(p.fixed_points[1] == doctest::Approx(pi));
    for (double s : {1e-3, 1e-4, 1e-5}) CHECK(std::abs(m.a(s) / std::sin(s) - 1.0) < 1e-10);
  }

  TEST_CASE("flat torus has a free action") {
    const auto m = builtin_model("flat_torus");
    CHECK(m.boundary == Boundary::Periodic);
    const auto p = action_profile(m);
    CHECK(p.Lambda == 1);
    CHECK(p.fixed_points.empty());
  }

  TEST_CASE("spheroid profile is an arclength parametrisation") {
    const auto m = builtin_model("spheroid");
    // Total length against the ellipse arclength integral.
    const double B = 1.5;
    const double len = quad::adaptive(
        [B](double t) { return std::sqrt(std::cos(t) * std::cos(t) + B * B * std::sin(t) * std::sin(t)); },
        0.0, pi).value;
    CHECK(m.L == doctest::Approx(len).epsilon(1e-12));
    // The equator sits at half length with a = 1, a' = 0.
    CHECK(m.a(m.L / 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m.da(m.L / 2)) < 1e-10);
    // a' matches a central difference of a.
    for (double s : {0.3, 1.1, 2.5, 3.7}) {
      const double e = 1e-6;
      CHECK(m.da(s) == doctest::Approx((m.a(s + e) - m.a(s - e)) / (2 * e)).epsilon(1e-7));
    }
  }

  TEST_CASE("orbit volume") {
    const auto sphere = builtin_model("sphere");
    CHECK(orbit_volume(sphere, pi / 2).value == doctest::Approx(2 * pi));
    CHECK(orbit_volume(sphere, pi / 6).value == doctest::Approx(pi));
    // Oracle: length of the orbit circle by quadrature of its speed a(s).
    const double arc =
        quad::adaptive([&](double) { return sphere.a(pi / 6); }, 0.0, 2 * pi).value;
    CHECK(orbit_volume(sphere, pi / 6).value == doctest::Approx(arc).epsilon(1e-14));
    CHECK(orbit_volume(builtin_model("flat_torus"), 1.234).value == doctest::Approx(2 * pi));
    const auto pole = orbit_volume(sphere, 0.0);
    CHECK(pole.fixed_point);
    CHECK(pole.value == 1.0);
  }

  TEST_CASE("hamiltonian") {
    const auto torus = builtin_model("flat_torus");
    CHECK(hamiltonian_p(torus, {0.0, 0.0, 1.0, 0.0}) == 1.0);
    const auto sphere = builtin_model("sphere");
    CHECK(hamiltonian_p(sphere, {pi / 2, 0.0, 0.6, 0.8}) == doctest::Approx(1.0));
    const auto well = with_potential(sphere, [](double s) { return std::cos(s) * std::cos(s); });
    CHECK(std::abs(hamiltonian_p(well, {pi / 2, 0.0, 0.0, 0.0})) < 1e-30);
    // phi never enters.
    CHECK(hamiltonian_p(well, {0.7, 0.0, 0.3, 0.2}) == hamiltonian_p(well, {0.7, 2.1, 0.3, 0.2}));
  }

  TEST_CASE("invalid profiles are rejected") {
    auto m = builtin_model("sphere");
    m.a = [](double s) { return 2.0 * std::sin(s); };
    m.da = [](double s) { return 2.0 * std::cos(s); };
    CHECK_THROWS_AS(validate(m), InvalidModel);
    auto t = builtin_model("bumpy_torus");
    t.a = [](double s) { return std::cos(s); };
    CHECK_THROWS_AS(validate(t), InvalidModel);
  }

  TEST_CASE("with_potential drops the exact backend") {
    const auto m = with_potential(builtin_model("sphere"), [](double s) { return s; });
    CHECK(m.exact_backend == ExactBackend::None);
    CHECK(m.dV(1.0) == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("fiber integration reproduces the surface integral") {
    const SurfaceFn f = [](double s, double phi) { return (1.0 + s) * std::cos(phi) * std::cos(phi); };
    for (const auto& name : builtin_names()) {
      CAPTURE(name);
      const auto m = builtin_model(name);
      const double direct = surface_integral(m, f);
      const double fibered = fiber_integral(m, f);
      CHECK(std::abs(direct - fibered) <= 1e-8 * std::max(1.0, std::abs(direct)));
    }
    // Sphere: pi * int_0^pi (1 + s) sin s ds = pi (2 + pi).
    CHECK(surface_integral(builtin_model("sphere"), f) ==
          doctest::Approx(pi * (2.0 + pi)).epsilon(1e-12));
  }
}
