#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "eqweyl/errors.hpp"
#include "eqweyl/experiment.hpp"
#include "eqweyl/reduction.hpp"
#include "eqweyl/weyllab.hpp"

using namespace eqweyl;

namespace {

constexpr double kPi = std::numbers::pi;

// Exact records for modes ks up to E_max, complete through E_max.
SpectrumTable exact_table(const RevolutionSurface& m, const std::vector<int>& ks, double h,
                          double E_max) {
  std::vector<EigenRecord> all;
  std::map<int, double> cov;
  for (int k : ks) {
    auto r = exact_spectrum(m, k, h, E_max);
    all.insert(all.end(), r.begin(), r.end());
    cov[k] = E_max;
  }
  return multiplicity_table(std::move(all), 1e-9, cov);
}

std::vector<double> geometric(double hi, double lo, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(hi * std::pow(lo / hi, i / double(n - 1)));
  return v;
}

std::size_t raw_count(const SpectrumSource& src, int k, double lo, double hi) {
  std::size_t n = 0;
  src.visit(k, lo, hi, Observable::identity(), [&](double, double) { ++n; });
  return n;
}

}  // namespace

TEST_SUITE("weyllab") {
  TEST_CASE("empty window") {
    const auto sphere = builtin_model("sphere");
    const ExactSource src(sphere, 0.05);
    SpectralWindow w{-3.0, 0.16};
    CHECK(weyl_lhs_single(src, {0}, w, Observable::identity()) == 0.0);
    const auto table = exact_table(sphere, {0}, 0.05, 2.0);
    CHECK(counting_lhs(table, CharacterFamily::fixed({0}), w) == 0.0);
  }

  TEST_CASE("flat torus lattice count") {
    const auto torus = builtin_model("flat_torus");
    const double h = 1e-4, delta = 0.16;
    const ExactSource src(torus, h);
    const SpectralWindow w{1.0, delta};
    const double H = std::pow(h, delta);
    long long count = 0;
    for (long long m = -20000; m <= 20000; ++m) {
      const double E = h * h * (0.0 + static_cast<double>(m) * static_cast<double>(m));
      if (E >= 1.0 && E <= 1.0 + H) ++count;
    }
    CHECK(count > 2000);
    const double expected = 2.0 * kPi * std::pow(h, 1.0 - delta) * static_cast<double>(count) / 1.0;
    CHECK(weyl_lhs_single(src, {0}, w, Observable::identity()) == expected);
  }

  TEST_CASE("fixed family equals single character bitwise") {
    const auto sphere = builtin_model("sphere");
    const auto obs = make_observable("cos2", "energy_bump");
    for (double h : {3e-2, 1e-3}) {
      const ExactSource src(sphere, h);
      for (int k : {0, 2, -5}) {
        const SpectralWindow w{1.0, 0.1};
        const double a = weyl_lhs_single(src, {k}, w, obs);
        const double b = weyl_lhs_family(src, CharacterFamily::fixed({k}), w, obs);
        CHECK(std::memcmp(&a, &b, sizeof a) == 0);
      }
    }
  }

  TEST_CASE("zero multiplication part") {
    const auto sphere = builtin_model("sphere");
    const ExactSource src(sphere, 1e-2);
    const auto zero = make_observable("cos2", "one").scaled(0.0);
    CHECK(weyl_lhs_family(src, CharacterFamily::power_law(0.1), {1.0, 0.05}, zero) == 0.0);
  }

  TEST_CASE("counting form equals the B = Id sum") {
    const auto sphere = builtin_model("sphere");
    for (double h : {2e-2, 5e-3}) {
      const auto fam = CharacterFamily::power_law(0.1);
      std::vector<int> ks;
      for (const auto& chi : family_at(fam, h)) ks.push_back(chi.k);
      const SpectralWindow w{1.0, 0.05};
      const auto table = exact_table(sphere, ks, h, window_coverage_need(w, h, 0.1) + 0.1);
      const TableSource src(table, sphere);
      const double a = counting_lhs(table, fam, w);
      const double b = weyl_lhs_family(src, fam, w, Observable::identity());
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
      CHECK(a > 0.0);
    }
  }

  TEST_CASE("linearity in the multiplication part") {
    const auto sphere = builtin_model("sphere");
    const ExactSource src(sphere, 1e-2);
    const auto obs = make_observable("cos2", "one");
    const double alpha = 3.7;
    const SpectralWindow w{1.0, 0.1};
    const auto fam = CharacterFamily::power_law(0.1);
    const double base = weyl_lhs_family(src, fam, w, obs);
    const double scaled = weyl_lhs_family(src, fam, w, obs.scaled(alpha));
    CHECK(scaled == doctest::Approx(alpha * base).epsilon(1e-12));

    const ReducedSymbol b = [](double s, double) { return std::cos(s) * std::cos(s); };
    const ReducedSymbol ab = [&](double s, double sg) { return alpha * b(s, sg); };
    CHECK(sigma_c_integral(sphere, 1.0, ab) ==
          doctest::Approx(alpha * sigma_c_integral(sphere, 1.0, b)).epsilon(1e-12));

    const auto rho = bump(1.0, 0.5, 1.0);
    CHECK(trace_lhs(src, fam, rho, obs.scaled(alpha)) ==
          doctest::Approx(alpha * trace_lhs(src, fam, rho, obs)).epsilon(1e-12));
  }

  TEST_CASE("smaller windows never count more") {
    for (const char* name : {"sphere", "flat_torus"}) {
      const auto m = builtin_model(name);
      const double h = 2e-3;
      const ExactSource src(m, h);
      std::size_t prev = std::numeric_limits<std::size_t>::max();
      for (double delta : {0.05, 0.1, 0.15, 0.2, 0.3}) {
        const std::size_t n = raw_count(src, 1, 1.0, 1.0 + std::pow(h, delta));
        CHECK(n <= prev);
        prev = n;
      }
    }
  }

  TEST_CASE("insufficient spectrum") {
    const auto sphere = builtin_model("sphere");
    const double h = 1e-2;
    const SpectralWindow w{1.0, 0.16};
    const auto table = exact_table(sphere, {0}, h, 1.2);
    const TableSource src(table, sphere);
    CHECK_THROWS_AS(weyl_lhs_single(src, {0}, w, Observable::identity()), InsufficientSpectrum);
    CHECK_THROWS_AS(weyl_lhs_single(src, {3}, {0.1, 0.16}, Observable::identity()),
                    InsufficientSpectrum);
    CHECK_THROWS_AS(counting_lhs(table, CharacterFamily::fixed({0}), w), InsufficientSpectrum);
    CHECK_THROWS_AS(trace_lhs(src, CharacterFamily::fixed({0}), bump(1.0, 0.5, 1.0),
                              Observable::identity()),
                    InsufficientSpectrum);
  }

  TEST_CASE("strict window range") {
    SpectralWindow w{1.0, 0.3};
    CHECK_THROWS_AS(w.check(), ValidationError);
    w.strict = false;
    CHECK_NOTHROW(w.check());
    CHECK(family_within_theorem(0.1, 0.05));
    CHECK_FALSE(family_within_theorem(0.15, 0.05));
  }

  TEST_CASE("torus trace against the phase-space integral") {
    const auto torus = builtin_model("flat_torus");
    const auto rho = bump(1.0, 0.5, 1.0);
    const ExactSource src(torus, 1e-3);
    const double lhs = trace_lhs(src, CharacterFamily::fixed({0}), rho, Observable::identity());
    const double rhs = omega_weighted_integral(torus, [](double, double) { return 1.0; }, rho);
    CHECK(std::abs(lhs - rhs) <= 0.01 * rhs);
    CHECK(trace_lhs(src, CharacterFamily::fixed({0}), bump(1.0, 0.5, 0.0),
                    Observable::identity()) == 0.0);
  }

  TEST_CASE("closed-form cos^2 moments match sampled eigenfunctions") {
    const auto sphere = builtin_model("sphere");
    const ExactSource src(sphere, 0.05);
    auto closed = make_observable("cos2", "one");
    auto sampled = closed;
    sampled.sphere_moment = nullptr;
    for (int k : {0, 1, 4}) {
      const SpectralWindow w{1.0, 0.16};
      const double a = weyl_lhs_single(src, {k}, w, closed);
      const double b = weyl_lhs_single(src, {k}, w, sampled);
      CHECK(a == doctest::Approx(b).epsilon(1e-3));
    }
    CHECK(sphere_cos2_moment(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(sphere_cos2_moment(1, 1) == doctest::Approx(1.0 / 5.0));
    CHECK(sphere_cos2_moment(1, 0) == doctest::Approx(3.0 / 5.0));
  }

  TEST_CASE("predicted exponents") {
    FitParameters p{0.05, 0.1, 1, 2};
    CHECK(predicted_exponent("weyl_family", p) == doctest::Approx((1.0 - 5 * 0.1) / 6.0 - 0.05));
    CHECK(predicted_exponent("weyl_family", {0.03, 0.1, 1, 2}) == doctest::Approx(0.03));
    CHECK(predicted_exponent("weyl_single", {0.16, 0.0, 1, 2}) ==
          doctest::Approx(1.0 / 6.0 - 0.16));
    CHECK(predicted_exponent("trace", p) == doctest::Approx(1.0 - 5.0 * 0.15));
  }

  TEST_CASE("fits on synthetic errors") {
    const auto hs = geometric(1e-1, 1e-4, 9);
    std::vector<double> lhs, lead(hs.size(), 2.0);
    SUBCASE("pure power") {
      for (double h : hs) lhs.push_back(2.0 + std::pow(h, 0.5));
      const auto r = compare_and_fit(hs, lhs, lead, {});
      CHECK(r.slope == doctest::Approx(0.5).epsilon(1e-6));
      CHECK(r.pass);
    }
    SUBCASE("log factor") {
      for (double h : hs) lhs.push_back(2.0 - std::pow(h, 0.3) * std::log(1.0 / h));
      const auto r = compare_and_fit(hs, lhs, lead, {0.1, 0.0, 1, 2});
      CHECK(std::abs(r.slope_logcorrected - 0.3) <= 0.02);
      CHECK(r.slope < r.slope_logcorrected);
    }
    SUBCASE("constant") {
      for (std::size_t i = 0; i < hs.size(); ++i) lhs.push_back(2.5);
      const auto r = compare_and_fit(hs, lhs, lead, {});
      CHECK(std::abs(r.slope) < 1e-12);
      CHECK_FALSE(r.pass);
    }
    SUBCASE("exact agreement") {
      for (double h : hs) lhs.push_back(2.0 + h);
      lhs[3] = 2.0;
      const auto r = compare_and_fit(hs, lhs, lead, {});
      CHECK(std::isinf(r.slope));
      CHECK(r.slope > 0.0);
      const auto j = nlohmann::json::parse(report_summary_json(r));
      CHECK(j["slope"] == "+inf");
    }
  }

  TEST_CASE("fit preconditions") {
    const std::vector<double> lead(4, 1.0), lhs{1.1, 1.05, 1.01, 1.001};
    CHECK_THROWS_AS(compare_and_fit({1e-1, 1e-2, 1e-3}, {1.1, 1.0, 1.0}, {1, 1, 1}, {}),
                    ValidationError);
    CHECK_THROWS_AS(compare_and_fit({1e-1, 5e-2, 2e-2, 1e-2 * 1.5}, lhs, lead, {}),
                    ValidationError);
    CHECK_THROWS_AS(compare_and_fit({1e-1, 1e-2, 1e-2, 1e-3}, lhs, lead, {}), ValidationError);
    CHECK_NOTHROW(compare_and_fit({1e-1, 1e-2, 3e-3, 1e-3}, lhs, lead, {}));
  }

  TEST_CASE("report serialisation") {
    const auto hs = geometric(1e-1, 1e-3, 5);
    std::vector<double> lhs, lead(hs.size(), kPi);
    for (double h : hs) lhs.push_back(kPi + 0.1 * h);
    const auto r = compare_and_fit(hs, lhs, lead, {0.16, 0.0, 1, 2}, "counting_single", "sphere");
    std::ostringstream os;
    write_report_csv(os, r, {"config abc"});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "# config abc");
    std::getline(is, line);
    CHECK(line == "theorem,model,h,lhs,leading,abs_error");
    std::getline(is, line);
    CHECK(line.rfind("counting_single,sphere,0.10000000000000001,", 0) == 0);
    int rows = 1;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 5);

    const auto j = nlohmann::json::parse(report_summary_json(r));
    for (const char* key : {"slope", "slope_logcorrected", "predicted_exponent", "pass"})
      CHECK(j.contains(key));
    CHECK(j["slope"].get<double>() == doctest::Approx(1.0));
    CHECK(j["pass"] == true);
  }
}
