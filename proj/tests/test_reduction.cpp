#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "eqweyl/errors.hpp"
#include "eqweyl/io.hpp"
#include "eqweyl/quadrature.hpp"
#include "eqweyl/reduction.hpp"

using namespace eqweyl;
using std::numbers::pi;

namespace {

const ReducedSymbol kOne = [](double, double) { return 1.0; };

// V = 0.8 (1 - cos(w s)): monotone between the poles on pole models
// (w = pi / L), two turning points per level on tori (w = 1).
RevolutionSurface with_well(const std::string& name) {
  auto m = builtin_model(name);
  const double w = m.boundary == Boundary::Poles ? pi / m.L : 1.0;
  return with_potential(
      m, [w](double s) { return 0.8 * (1.0 - std::cos(w * s)); },
      [w](double s) { return 0.8 * w * std::sin(w * s); });
}

// Independent oracle: QAGS on the raw inverse square root, split at the roots.
double raw_volume(const RevolutionSurface& m, double c) {
  auto roots = level_crossings(m, c);
  std::vector<double> cuts{0.0};
  cuts.insert(cuts.end(), roots.begin(), roots.end());
  cuts.push_back(m.L);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i] || m.V(0.5 * (cuts[i] + cuts[i + 1])) >= c) continue;
    total += quad::singular(
                 [&](double s) {
                   const double d = c - m.V(s);
                   return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
                 },
                 cuts[i], cuts[i + 1], {1e-12, 1e-10})
                 .value;
  }
  return total;
}

}  // namespace

TEST_SUITE("reduction") {
  TEST_CASE("orbit averages") {
    const PhaseSymbol inv = [](const PhasePoint& p) { return p.s + p.sigma * p.sigma; };
    CHECK(averaged_symbol(inv, 0.3, 0.5, 0.0) == doctest::Approx(0.55).epsilon(1e-15));
    const PhaseSymbol cos2 = [](const PhasePoint& p) { return std::cos(p.phi) * std::cos(p.phi); };
    CHECK(averaged_symbol(cos2, 1.0, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    const PhaseSymbol cos1 = [](const PhasePoint& p) { return std::cos(p.phi); };
    CHECK(std::abs(averaged_symbol(cos1, 1.0, 0.0, 0.0)) < 1e-14);
  }

  TEST_CASE("reduced Hamiltonian is p at zero angular momentum") {
    const auto m = with_well("sphere");
    for (double s : {0.2, 1.0, 2.9})
      for (double sg : {-1.0, 0.0, 0.7})
        CHECK(reduced_hamiltonian(m, s, sg) == hamiltonian_p(m, {s, 0.4, sg, 0.0}));
  }

  TEST_CASE("volumes of the exact models") {
    CHECK(reduced_volume(builtin_model("sphere"), 1.0) == doctest::Approx(pi).epsilon(1e-12));
    CHECK(reduced_volume(builtin_model("flat_torus"), 1.0) ==
          doctest::Approx(2 * pi).epsilon(1e-12));
    CHECK(reduced_volume(builtin_model("flat_torus"), 4.0) == doctest::Approx(pi).epsilon(1e-12));
  }

  TEST_CASE("tangent levels are not regular") {
    const auto t = apply_potential(builtin_model("flat_torus"), "half_one_minus_cos");
    CHECK_THROWS_AS(reduced_volume(t, 1.0), NonRegularValue);
    CHECK_THROWS_AS(reduced_volume(t, 0.0), NonRegularValue);
    for (double c : {0.5, 2.0}) {
      CAPTURE(c);
      const double v = reduced_volume(t, c);
      CHECK(std::abs(v - thin_shell_measure(t, c, 1e-4, kOne)) < 1e-3);
      CHECK(v == doctest::Approx(raw_volume(t, c)).epsilon(1e-8));
    }
    // Closed form at c = 1/2: 2 sqrt 2 int_0^{pi/2} cos^{-1/2} = 2 sqrt(2 pi) Gamma(1/4)/(2 Gamma(3/4)).
    const double closed = std::sqrt(2.0 * pi) * std::tgamma(0.25) / std::tgamma(0.75);
    CHECK(reduced_volume(t, 0.5) == doctest::Approx(closed).epsilon(1e-11));
  }

  TEST_CASE("turning-point quadrature against thin shells on every model") {
    for (const auto& name : builtin_names())
      for (double c : {0.5, 1.0, 2.0}) {
        CAPTURE(name);
        CAPTURE(c);
        const auto m = with_well(name);
        const double v = reduced_volume(m, c);
        const double eps = 1e-4;
        CHECK(std::abs(v - thin_shell_measure(m, c, eps, kOne)) <= std::max(1e-3, 5 * eps));
        CHECK(v == doctest::Approx(raw_volume(m, c)).epsilon(1e-7));
      }
  }

  TEST_CASE("thin shell") {
    const auto s = builtin_model("sphere");
    CHECK(std::abs(thin_shell_measure(s, 1.0, 1e-3, kOne) - pi) < 2e-3);
    CHECK(thin_shell_measure(s, 1.0, 1e-3, [](double, double) { return 0.0; }) == 0.0);
    CHECK_THROWS_AS(thin_shell_measure(with_well("sphere"), -1.0, 1e-3, kOne), ZeroShell);
  }

  TEST_CASE("thin shell converges at first order for a nonconstant potential") {
    const auto m = with_well("flat_torus");
    const double c = 1.0;
    const double v = reduced_volume(m, c);
    std::vector<double> le, lr;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      le.push_back(std::log(eps));
      lr.push_back(std::log(std::abs(thin_shell_measure(m, c, eps, kOne) - v)));
    }
    const double slope = (lr.back() - lr.front()) / (le.back() - le.front());
    CHECK(slope >= 0.8);
  }

  TEST_CASE("level-curve integrals of symbols") {
    const auto s = builtin_model("sphere");
    CHECK(sigma_c_integral(s, 1.0, kOne) == reduced_volume(s, 1.0));
    CHECK(sigma_c_integral(s, 1.0, [](double, double sg) { return sg * sg; }) ==
          doctest::Approx(pi).epsilon(1e-12));
    CHECK(std::abs(sigma_c_integral(s, 1.0, [](double, double sg) { return sg; })) < 1e-14);
    const auto m = with_well("bumpy_torus");
    const ReducedSymbol f = [](double x, double sg) { return 1.0 + std::sin(x) * sg + x; };
    const ReducedSymbol g = [](double x, double) { return std::cos(x) * std::cos(x); };
    const double a = sigma_c_integral(m, 1.0, f), b = sigma_c_integral(m, 1.0, g);
    const double ab = sigma_c_integral(m, 1.0, [&](double x, double sg) { return 2 * f(x, sg) - 3 * g(x, sg); });
    CHECK(ab == doctest::Approx(2 * a - 3 * b).epsilon(1e-10));
    CHECK(b >= 0.0);
    CHECK(b <= reduced_volume(m, 1.0));
  }

  TEST_CASE("shell integral with orbit-averaged phase symbols") {
    const auto s = builtin_model("sphere");
    const PhaseSymbol b = [](const PhasePoint& p) {
      return 2.0 * std::cos(p.phi) * std::cos(p.phi) * std::cos(p.s) * std::cos(p.s);
    };
    // <b>_G = cos^2 s, integral over [0, pi] = pi/2.
    CHECK(sigma_c_integral(s, 1.0, orbit_average(b)) == doctest::Approx(pi / 2).epsilon(1e-12));
  }

  TEST_CASE("fixed points carry no mass") {
    const auto m = with_potential(builtin_model("sphere"),
                                  [](double s) { return 0.5 * std::cos(s) * std::cos(s); },
                                  [](double s) { return -0.5 * std::sin(2 * s); });
    const double full = reduced_volume(m, 1.0);
    std::vector<double> err;
    for (double d0 : {0.04, 0.02, 0.01}) {
      const double cut = sigma_c_integral(
          m, 1.0, [d0](double s, double) { return (s >= d0 && s <= pi - d0) ? 1.0 : 0.0; });
      err.push_back(full - cut);
    }
    CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.01));
    CHECK(err[1] / err[2] == doctest::Approx(2.0).epsilon(0.01));
  }

  TEST_CASE("phase-space integrals and the coarea identity") {
    const auto torus = builtin_model("flat_torus");
    const auto rho = bump(1.0, 0.5, 1.0);
    // Oracle: 2 pi int rho(sigma^2) d sigma.
    const double direct =
        2 * pi * quad::adaptive([&](double sg) { return rho(sg * sg); }, -1.3, 1.3).value;
    CHECK(omega_weighted_integral(torus, kOne, rho) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(omega_weighted_integral(torus, kOne, bump(1.0, 0.5, 0.0)) == 0.0);
    CHECK(std::abs(omega_weighted_integral(builtin_model("sphere"),
                                           [](double s, double sg) { return sg * (1 + s); }, rho)) <
          1e-12);

    for (const auto& m : {torus, with_well("sphere"), with_well("bumpy_torus")})
      for (const auto& r : {bump(1.0, 0.5, 1.0), bump(1.2, 0.3, 2.0), bump(0.9, 0.15, 1.0)}) {
        CAPTURE(m.name);
        const auto [lo, hi] = r.support();
        const double coarea =
            quad::adaptive([&](double c) { return r(c) * reduced_volume(m, c); }, lo, hi,
                           {1e-10, 1e-9})
                .value;
        CHECK(omega_weighted_integral(m, kOne, r) == doctest::Approx(coarea).epsilon(1e-4));
      }
  }

  TEST_CASE("reduced volume CSV") {
    std::ostringstream os;
    write_reduced_volume_csv(os, {{1.0, pi, "turning_point_quadrature", 1e-14}});
    CHECK(os.str() ==
          "c,volume,method,error_estimate\n1,3.1415926535897931,turning_point_quadrature,"
          "1e-14\n");
  }
}
