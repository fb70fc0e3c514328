#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "eqweyl/tridiag.hpp"

using namespace eqweyl;

namespace {

SymTridiag random_matrix(std::size_t n, bool periodic, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SymTridiag t;
  t.periodic = periodic;
  t.diag.resize(n);
  t.offdiag.resize(n - 1);
  for (auto& d : t.diag) d = 3.0 * u(rng);
  for (auto& e : t.offdiag) e = u(rng);
  if (periodic) t.corner = u(rng);
  return t;
}

Eigen::MatrixXd dense(const SymTridiag& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) A(i, i) = t.diag[i];
  for (Eigen::Index i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = t.offdiag[i];
  if (t.periodic) A(0, n - 1) = A(n - 1, 0) += t.corner;
  return A;
}

// Discrete Laplacian on a cycle: eigenvalues 2 - 2 cos(2 pi j / n), mostly
// doubly degenerate.
SymTridiag cycle(std::size_t n) {
  SymTridiag t;
  t.periodic = true;
  t.diag.assign(n, 2.0);
  t.offdiag.assign(n - 1, -1.0);
  t.corner = -1.0;
  return t;
}

}  // namespace

TEST_SUITE("tridiag") {
  TEST_CASE("eigenvalues match a dense solver") {
    for (bool periodic : {false, true})
      for (std::size_t n : {3u, 4u, 17u, 64u, 201u}) {
        CAPTURE(periodic);
        CAPTURE(n);
        const auto t = random_matrix(n, periodic, 7u * n + periodic);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(t));
        const auto ev = bisect_eigenvalues(t, 0, n);
        REQUIRE(ev.size() == n);
        for (std::size_t j = 0; j < n; ++j)
          CHECK(std::abs(ev[j] - es.eigenvalues()(j)) < 1e-11);
      }
  }

  TEST_CASE("Sturm count is the inertia") {
    const auto t = random_matrix(50, true, 3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(t));
    for (double x : {-4.0, -1.0, 0.0, 0.5, 2.0, 5.0}) {
      const auto expect = static_cast<std::size_t>((es.eigenvalues().array() < x).count());
      CHECK(count_below(t, x) == expect);
    }
  }

  TEST_CASE("degenerate cyclic pairs") {
    const std::size_t n = 200;
    const auto t = cycle(n);
    const auto ev = bisect_eigenvalues(t, 0, 21);
    std::vector<double> rq;
    const auto vecs = inverse_iteration(t, ev, {}, &rq);
    for (std::size_t j = 0; j < 21; ++j) {
      const double m = static_cast<double>((j + 1) / 2);
      CHECK(std::abs(rq[j] - (2.0 - 2.0 * std::cos(2.0 * M_PI * m / n))) < 1e-13);
    }
    // The two vectors of each pair are orthonormal.
    for (std::size_t j = 1; j + 1 < 21; j += 2) {
      double dot = 0.0, n1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dot += vecs[j][i] * vecs[j + 1][i];
        n1 += vecs[j][i] * vecs[j][i];
      }
      CHECK(std::abs(dot) < 1e-10);
      CHECK(n1 == doctest::Approx(1.0).epsilon(1e-13));
    }
  }

  TEST_CASE("inverse iteration residuals") {
    for (bool periodic : {false, true}) {
      const auto t = random_matrix(120, periodic, 11);
      const auto ev = bisect_eigenvalues(t, 0, 120);
      const auto vecs = inverse_iteration(t, ev);
      Eigen::MatrixXd A = dense(t);
      for (std::size_t j = 0; j < ev.size(); ++j) {
        Eigen::Map<const Eigen::VectorXd> x(vecs[j].data(), 120);
        CHECK((A * x - ev[j] * x).norm() < 1e-9);
      }
    }
  }

  TEST_CASE("shifted factor solves the banded system") {
    for (bool periodic : {false, true}) {
      const auto t = random_matrix(40, periodic, 5);
      const double shift = 0.123;
      std::vector<double> b(40);
      for (std::size_t i = 0; i < 40; ++i) b[i] = std::sin(1.0 + i);
      std::vector<double> x = b;
      ShiftedFactor(t, shift).solve(x);
      Eigen::MatrixXd A = dense(t) - shift * Eigen::MatrixXd::Identity(40, 40);
      Eigen::Map<const Eigen::VectorXd> xv(x.data(), 40), bv(b.data(), 40);
      CHECK((A * xv - bv).norm() < 1e-10);
    }
  }

  TEST_CASE("Gershgorin encloses the spectrum") {
    const auto t = random_matrix(30, true, 9);
    const auto [lo, hi] = t.gershgorin();
    const auto ev = bisect_eigenvalues(t, 0, 30);
    CHECK(lo <= ev.front());
    CHECK(hi >= ev.back());
  }
}
