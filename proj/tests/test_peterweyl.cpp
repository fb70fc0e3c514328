#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "eqweyl/errors.hpp"
#include "eqweyl/peterweyl.hpp"

using namespace eqweyl;

TEST_SUITE("peterweyl") {
  TEST_CASE("family_at") {
    const auto fam = CharacterFamily::power_law(1.0 / 6.0);
    const auto w = family_at(fam, 1.0 / 64.0);
    REQUIRE(w.size() == 5);
    CHECK(w.front().k == -2);
    CHECK(w.back().k == 2);
    const auto one = family_at(CharacterFamily::power_law(0.3), 1.0);
    REQUIRE(one.size() == 3);
    CHECK(one[1].k == 0);
    const auto fixed = family_at(CharacterFamily::fixed({0}), 0.01);
    REQUIRE(fixed.size() == 1);
    CHECK(fixed[0].k == 0);
    CHECK(CharacterFamily::fixed({2}).theta() == 0.0);
  }

  TEST_CASE("family_at is monotone in h") {
    const auto fam = CharacterFamily::power_law(0.25);
    std::size_t prev = 0;
    for (double h = 1.0; h > 1e-6; h *= 0.63) {
      const auto n = family_at(fam, h).size();
      CHECK(n >= prev);
      prev = n;
    }
  }

  TEST_CASE("growth rate estimate") {
    const auto fam = CharacterFamily::power_law(1.0 / 6.0);
    const std::vector<double> hs{1.0, 0.1, 1.0 / 64.0, 1e-3, 1e-5};
    for (double r : growth_rate_estimate(fam, 0, hs)) CHECK(r == doctest::Approx(1.0));
    CHECK(growth_rate_estimate(fam, 1, {1.0 / 64.0})[0] == doctest::Approx(0.6));
    for (double r : growth_rate_estimate(CharacterFamily::fixed({3}), 2, hs)) CHECK(r == 9.0);
    for (int N = 1; N <= 6; ++N)
      for (double r : growth_rate_estimate(fam, N, hs)) CHECK(r <= 1.0 + 1e-12);
    CHECK_THROWS_AS(growth_rate_estimate(fam, 7, hs), ValidationError);
  }

  TEST_CASE("sphere eigenspaces") {
    const auto s = builtin_model("sphere");
    std::vector<EigenRecord> recs;
    const int lmax = 12;
    for (int k = -lmax; k <= lmax; ++k) {
      auto e = exact_spectrum(s, k, 1.0, lmax * (lmax + 1.0));
      recs.insert(recs.end(), e.begin(), e.end());
    }
    const auto t = multiplicity_table(recs);
    REQUIRE(t.clusters.size() == lmax + 1);
    for (int l = 0; l <= lmax; ++l) {
      const auto& c = t.clusters[l];
      CHECK(c.E == l * (l + 1.0));
      CHECK(c.dim == 2u * l + 1u);
      std::size_t sum = 0;
      for (const auto& [k, m] : c.mult) {
        CHECK(std::abs(k) <= l);
        CHECK(m == 1u);
        sum += m;
      }
      CHECK(sum == c.dim);
    }
    const auto& l3 = t.clusters[3];
    CHECK(l3.dim == 7);
  }

  TEST_CASE("flat torus lattice multiplicity at E = 25 h^2") {
    const auto t = builtin_model("flat_torus");
    const double h = 0.1;
    std::vector<EigenRecord> recs;
    for (int k = -6; k <= 6; ++k) {
      auto e = exact_spectrum(t, k, h, 25.5 * h * h);
      recs.insert(recs.end(), e.begin(), e.end());
    }
    const auto table = multiplicity_table(recs);
    // Oracle: direct lattice-point enumeration of k^2 + m^2 = 25.
    std::size_t lattice = 0;
    for (int k = -6; k <= 6; ++k)
      for (int m = -6; m <= 6; ++m) lattice += (k * k + m * m == 25);
    const auto& top = table.clusters.back();
    CHECK(top.E == doctest::Approx(0.25));
    CHECK(top.dim == lattice);
    CHECK(top.dim == 12);
  }

  TEST_CASE("empty and mixed inputs") {
    CHECK(multiplicity_table({}).clusters.empty());
    const auto s = builtin_model("sphere");
    auto a = exact_spectrum(s, 0, 1.0, 10.0);
    auto b = exact_spectrum(s, 0, 0.5, 10.0);
    a.insert(a.end(), b.begin(), b.end());
    CHECK_THROWS_AS(multiplicity_table(a), MixedParameters);
  }

  TEST_CASE("finite-difference splittings are re-merged") {
    std::vector<EigenRecord> recs(3);
    recs[0].E = 2.0;
    recs[1].E = 2.0 * (1 + 5e-12);
    recs[1].k = 1;
    recs[2].E = 2.0 * (1 + 5e-5);
    for (auto& r : recs) r.h = 1.0;
    const auto t = multiplicity_table(recs, 1e-11);
    REQUIRE(t.clusters.size() == 2);
    CHECK(t.clusters[0].dim == 2);
  }

  TEST_CASE("multiplicity CSV") {
    const auto s = builtin_model("sphere");
    std::vector<EigenRecord> recs;
    for (int k = -1; k <= 1; ++k) {
      auto e = exact_spectrum(s, k, 1.0, 2.0);
      recs.insert(recs.end(), e.begin(), e.end());
    }
    std::ostringstream os;
    write_multiplicity_csv(os, multiplicity_table(recs));
    CHECK(os.str() == "E,dim,k,mult\n0,1,0,1\n2,3,-1,1\n2,3,0,1\n2,3,1,1\n");
  }
}
