#include "eqweyl/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "eqweyl/errors.hpp"

namespace eqweyl {
namespace {

double pivmin_of(const SymTridiag& t) {
  double emax = 1.0;
  for (double e : t.offdiag) emax = std::max(emax, e * e);
  if (t.periodic) emax = std::max(emax, t.corner * t.corner);
  return std::numeric_limits<double>::min() * emax;
}

// Negative pivot count of the LDL^T sweep of the leading m x m block of (T - x).
std::size_t sturm_sweep(const SymTridiag& t, std::size_t m, double x, double pivmin) {
  std::size_t neg = 0;
  double q = t.diag[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0) ++neg;
  for (std::size_t i = 1; i < m; ++i) {
    const double e = t.offdiag[i - 1];
    q = (t.diag[i] - x) - e * e / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0) ++neg;
  }
  return neg;
}

// Symmetric 2x2 matrix [p r; r q].
struct Sym2 {
  double p, q, r;

  struct Eig {
    double l1, l2, c, s;  // eigenvalues and rotation (c, s) of the first eigenvector
    Sym2 inverse() const {
      const double i1 = 1.0 / l1, i2 = 1.0 / l2;
      return {c * c * i1 + s * s * i2, s * s * i1 + c * c * i2, c * s * (i1 - i2)};
    }
  };

  // Jacobi rotation; eigenvalues of magnitude below pivmin are replaced by -pivmin.
  Eig eig(double pivmin) const {
    Eig e{p, q, 1.0, 0.0};
    if (r != 0.0) {
      const double theta = 0.5 * (q - p) / r;
      const double tt = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      e.c = 1.0 / std::sqrt(tt * tt + 1.0);
      e.s = tt * e.c;
      e.l1 = p - tt * r;
      e.l2 = q + tt * r;
      // Eigenvector of l1 is (c, -s).
      e.s = -e.s;
    }
    if (std::abs(e.l1) < pivmin) e.l1 = -pivmin;
    if (std::abs(e.l2) < pivmin) e.l2 = -pivmin;
    return e;
  }
};

}  // namespace

void SymTridiag::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += offdiag[i - 1] * x[i - 1];
    if (i + 1 < n) v += offdiag[i] * x[i + 1];
    y[i] = v;
  }
  if (periodic && n > 2) {
    y[0] += corner * x[n - 1];
    y[n - 1] += corner * x[0];
  }
}

double SymTridiag::norm_inf() const {
  const std::size_t n = size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(offdiag[i - 1]);
    if (i + 1 < n) r += std::abs(offdiag[i]);
    if (periodic && (i == 0 || i == n - 1)) r += std::abs(corner);
    best = std::max(best, r);
  }
  return best;
}

std::pair<double, double> SymTridiag::gershgorin() const {
  const std::size_t n = size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(offdiag[i - 1]);
    if (i + 1 < n) r += std::abs(offdiag[i]);
    if (periodic && (i == 0 || i == n - 1)) r += std::abs(corner);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  return {lo, hi};
}

std::size_t count_below(const SymTridiag& t, double x) {
  const std::size_t n = t.size();
  if (n == 0) return 0;
  const double pivmin = pivmin_of(t);
  if (!t.periodic || n < 3) return sturm_sweep(t, n, x, pivmin);

  // Block Sturm sequence: pairing node j with n-1-j turns the cyclic matrix
  // into a block tridiagonal one with 2x2 blocks (a trailing 1x1 block when n
  // is odd). Inertia is the sum of the inertias of the block pivots.
  const std::size_t pairs = n / 2;
  std::size_t neg = 0;
  Sym2 D{t.diag[0] - x, t.diag[n - 1] - x, t.corner};
  for (std::size_t j = 0;; ++j) {
    const Sym2::Eig eig = D.eig(pivmin);
    neg += (eig.l1 < 0) + (eig.l2 < 0);
    if (j + 1 == pairs) break;
    // Coupling to the next block is diag(e_j, e_{n-2-j}).
    const double c1 = t.offdiag[j], c2 = t.offdiag[n - 2 - j];
    const Sym2 inv = eig.inverse();
    const std::size_t a = j + 1, b = n - 2 - j;
    const double off = (a + 1 == b) ? t.offdiag[a] : 0.0;
    D = Sym2{t.diag[a] - x - c1 * c1 * inv.p, t.diag[b] - x - c2 * c2 * inv.q,
             off - c1 * c2 * inv.r};
  }
  if (n % 2 == 1) {
    const std::size_t m = pairs;  // middle node, coupled to both members of the last pair
    const Sym2 inv = D.eig(pivmin).inverse();
    const double c1 = t.offdiag[m - 1], c2 = t.offdiag[m];
    double q = t.diag[m] - x - (c1 * c1 * inv.p + c2 * c2 * inv.q + 2.0 * c1 * c2 * inv.r);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0) ++neg;
  }
  return neg;
}

std::vector<double> bisect_eigenvalues(const SymTridiag& t, std::size_t first,
                                       std::size_t last, double abs_tol) {
  std::vector<double> out;
  if (last <= first) return out;
  out.assign(last - first, 0.0);
  auto [lo, hi] = t.gershgorin();
  const double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  lo -= pad;
  hi += pad;
  const double eps = std::numeric_limits<double>::epsilon();

  struct Interval {
    double lo, hi;
    std::size_t clo, chi;
  };
  std::vector<Interval> stack{{lo, hi, count_below(t, lo), count_below(t, hi)}};
  while (!stack.empty()) {
    Interval iv = stack.back();
    stack.pop_back();
    const std::size_t a = std::max(iv.clo, first), b = std::min(iv.chi, last);
    if (a >= b) continue;
    const double width = iv.hi - iv.lo;
    const double tol = std::max(abs_tol, 4 * eps * std::max(std::abs(iv.lo), std::abs(iv.hi)));
    if (width <= tol) {
      for (std::size_t i = a; i < b; ++i) out[i - first] = 0.5 * (iv.lo + iv.hi);
      continue;
    }
    const double mid = 0.5 * (iv.lo + iv.hi);
    const std::size_t cm = count_below(t, mid);
    stack.push_back({mid, iv.hi, cm, iv.chi});
    stack.push_back({iv.lo, mid, iv.clo, cm});
  }
  return out;
}

ShiftedFactor::ShiftedFactor(const SymTridiag& t, double shift)
    : n_(t.size()), kl_(t.periodic ? 2 : 1), width_(3 * kl_ + 1), perm_(n_) {
  std::vector<std::size_t> pos(n_);
  if (t.periodic) {
    for (std::size_t j = 0, p = 0; p < n_; ++j) {
      perm_[p++] = j;
      if (p < n_) perm_[p++] = n_ - 1 - j;
    }
  } else {
    std::iota(perm_.begin(), perm_.end(), 0);
  }
  for (std::size_t p = 0; p < n_; ++p) pos[perm_[p]] = p;

  rows_.assign(n_ * width_, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& {
    return rows_[r * width_ + (c + kl_ - r)];
  };
  for (std::size_t i = 0; i < n_; ++i) at(pos[i], pos[i]) = t.diag[i] - shift;
  for (std::size_t i = 0; i + 1 < n_; ++i) {
    at(pos[i], pos[i + 1]) += t.offdiag[i];
    at(pos[i + 1], pos[i]) += t.offdiag[i];
  }
  if (t.periodic && n_ > 2) {
    at(pos[0], pos[n_ - 1]) += t.corner;
    at(pos[n_ - 1], pos[0]) += t.corner;
  }

  const double tiny = std::numeric_limits<double>::epsilon() * std::max(1.0, t.norm_inf());
  const std::size_t ku = kl_;
  mult_.assign(n_ * kl_, 0.0);
  pivot_.assign(n_, 0);
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t rmax = std::min(n_ - 1, k + kl_);
    const std::size_t cmax = std::min(n_ - 1, k + kl_ + ku);
    std::size_t p = k;
    for (std::size_t r = k + 1; r <= rmax; ++r)
      if (std::abs(at(r, k)) > std::abs(at(p, k))) p = r;
    pivot_[k] = p;
    if (p != k)
      for (std::size_t c = k; c <= cmax; ++c) std::swap(at(k, c), at(p, c));
    if (std::abs(at(k, k)) < tiny) at(k, k) = at(k, k) < 0 ? -tiny : tiny;
    for (std::size_t r = k + 1; r <= rmax; ++r) {
      const double f = at(r, k) / at(k, k);
      mult_[k * kl_ + (r - k - 1)] = f;
      at(r, k) = 0.0;
      if (f == 0.0) continue;
      for (std::size_t c = k + 1; c <= cmax; ++c) at(r, c) -= f * at(k, c);
    }
  }
  scratch_.resize(n_);
}

void ShiftedFactor::solve(std::span<double> b) const {
  auto at = [&](std::size_t r, std::size_t c) {
    return rows_[r * width_ + (c + kl_ - r)];
  };
  std::vector<double>& y = scratch_;
  for (std::size_t p = 0; p < n_; ++p) y[p] = b[perm_[p]];
  for (std::size_t k = 0; k < n_; ++k) {
    std::swap(y[k], y[pivot_[k]]);
    const std::size_t rmax = std::min(n_ - 1, k + kl_);
    for (std::size_t r = k + 1; r <= rmax; ++r) y[r] -= mult_[k * kl_ + (r - k - 1)] * y[k];
  }
  const std::size_t span = 2 * kl_;
  for (std::size_t k = n_; k-- > 0;) {
    double s = y[k];
    const std::size_t cmax = std::min(n_ - 1, k + span);
    for (std::size_t c = k + 1; c <= cmax; ++c) s -= at(k, c) * y[c];
    y[k] = s / at(k, k);
  }
  for (std::size_t p = 0; p < n_; ++p) b[perm_[p]] = y[p];
}

std::vector<std::vector<double>> inverse_iteration(
    const SymTridiag& t, std::span<const double> eigenvalues,
    const InverseIterationOptions& opts, std::vector<double>* rayleigh) {
  const std::size_t n = t.size();
  const std::size_t m = eigenvalues.size();
  std::vector<std::vector<double>> vecs(m);
  if (rayleigh) rayleigh->assign(m, 0.0);
  if (m == 0) return vecs;

  const double norm = std::max(1.0, t.norm_inf());
  const auto [glo, ghi] = t.gershgorin();
  const double spread = std::max(ghi - glo, 1.0);
  const double eps = std::numeric_limits<double>::epsilon();
  const double res_tol = 1e3 * eps * norm;

  std::vector<double> work(n);
  std::size_t cluster_start = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lambda = eigenvalues[i];
    if (i > 0 && lambda - eigenvalues[i - 1] > opts.cluster_rel * norm) cluster_start = i;
    const std::size_t pos_in_cluster = i - cluster_start;
    const double shift = lambda + 1e-10 * spread * static_cast<double>(pos_in_cluster);

    ShiftedFactor lu(t, shift);
    std::mt19937_64 rng(opts.seed + i);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = unif(rng);

    auto orthonormalize = [&](std::vector<double>& v) {
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t j = cluster_start; j < i; ++j) {
          const double d = std::inner_product(v.begin(), v.end(), vecs[j].begin(), 0.0);
          for (std::size_t q = 0; q < n; ++q) v[q] -= d * vecs[j][q];
        }
      const double nv = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
      for (double& q : v) q /= nv;
    };
    orthonormalize(x);

    bool converged = false;
    int extra = 1;
    double rq = lambda;
    for (int it = 0; it < opts.max_iterations; ++it) {
      lu.solve(x);
      orthonormalize(x);
      t.multiply(x, work);
      rq = std::inner_product(x.begin(), x.end(), work.begin(), 0.0);
      double r2 = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        const double d = work[q] - rq * x[q];
        r2 += d * d;
      }
      if (!std::isfinite(r2)) break;
      if (std::sqrt(r2) <= res_tol && extra-- == 0) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw EigvecFailure(i, "inverse iteration did not converge for eigenvalue index " +
                                 std::to_string(i));
    // Deterministic sign: first significant component positive.
    const auto big = std::find_if(x.begin(), x.end(), [](double v) { return std::abs(v) > 1e-8; });
    if (big != x.end() && *big < 0)
      for (double& v : x) v = -v;
    if (rayleigh) (*rayleigh)[i] = rq;
    vecs[i] = std::move(x);
  }
  return vecs;
}

}  // namespace eqweyl
