#include "eqweyl/modespec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "eqweyl/errors.hpp"

namespace eqweyl {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void normalize_weighted(const RevolutionSurface& model, const ModeGrid& grid,
                        std::vector<double>& u) {
  const double n2 = weighted_inner(model, grid, u, u);
  const double scale = 1.0 / std::sqrt(n2);
  for (double& v : u) v *= scale;
}

std::size_t sign_changes(const std::vector<double>& v) {
  std::size_t n = 0;
  double prev = 0.0;
  for (double x : v) {
    if (x == 0.0) continue;
    if (prev != 0.0 && (x > 0) != (prev > 0)) ++n;
    prev = x;
  }
  return n;
}

}  // namespace

ModeGrid ModeGrid::make(const RevolutionSurface& model, std::size_t N) {
  if (N < 16) throw ValidationError("mode grid needs N >= 16");
  ModeGrid g;
  g.N = N;
  g.L = model.L;
  g.spacing = model.L / static_cast<double>(N);
  g.boundary = model.boundary;
  g.nodes.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    g.nodes[i] = model.boundary == Boundary::Poles ? (i + 0.5) * g.spacing
                                                   : i * g.spacing;
  }
  return g;
}

ModeOperator assemble_mode_operator(const RevolutionSurface& model, int k,
                                    double h, std::shared_ptr<const ModeGrid> grid) {
  if (!(h > 0.0 && h <= 1.0)) throw ValidationError("h must lie in (0, 1]");
  if (!grid || grid->boundary != model.boundary || grid->L != model.L)
    throw ValidationError("grid incompatible with model");

  const std::size_t N = grid->N;
  const double d = grid->spacing;
  const double h2 = h * h;
  const double kin = h2 / (d * d);
  const bool poles = model.boundary == Boundary::Poles;

  ModeOperator op;
  op.k = k;
  op.h = h;
  op.grid = grid;
  op.a.resize(N);
  op.sqrt_a.resize(N);
  std::vector<double> V(N);
  for (std::size_t i = 0; i < N; ++i) {
    op.a[i] = model.a(grid->nodes[i]);
    op.sqrt_a[i] = std::sqrt(op.a[i]);
    V[i] = model.V(grid->nodes[i]);
  }
  op.potential_min = *std::min_element(V.begin(), V.end());

  // Profile at the flux points s_{i+1/2}, i = -1 .. N-1.
  std::vector<double> am(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    const double s = poles ? i * d : (static_cast<double>(i) - 0.5) * d;
    am[i] = model.a(poles ? s : (i == 0 ? model.L - 0.5 * d : s));
  }
  if (!poles) am[N] = am[0];

  SymTridiag& T = op.matrix;
  T.periodic = !poles;
  T.diag.resize(N);
  T.offdiag.resize(N - 1);
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  for (std::size_t i = 0; i < N; ++i) {
    double flux = am[i] + am[i + 1];
    if (poles) {
      // Dirichlet ghosts f_{-1} = -f_0, f_N = -f_{N-1}.
      if (i == 0) flux += am[0];
      if (i == N - 1) flux += am[N];
    }
    T.diag[i] = kin * flux / op.a[i] + h2 * kk / (op.a[i] * op.a[i]) + V[i];
  }
  for (std::size_t i = 0; i + 1 < N; ++i)
    T.offdiag[i] = -kin * am[i + 1] / (op.sqrt_a[i] * op.sqrt_a[i + 1]);
  if (!poles) T.corner = -kin * am[0] / (op.sqrt_a[0] * op.sqrt_a[N - 1]);

  if (k != 0 && poles) {
    std::vector<double> U(N);
    for (std::size_t i = 0; i < N; ++i) U[i] = h2 * kk / (op.a[i] * op.a[i]) + V[i];
    const double umin = *std::min_element(U.begin(), U.end());
    const double eref = op.potential_min + 4.0 * (umin - op.potential_min);
    const double limit = 4.0 * std::abs(static_cast<double>(k));
    for (std::size_t i = 0; i < N; ++i)
      if (U[i] <= eref) {
        op.grid_too_coarse |= d > op.a[i] / limit;
        break;
      }
    for (std::size_t i = N; i-- > 0;)
      if (U[i] <= eref) {
        op.grid_too_coarse |= d > op.a[i] / limit;
        break;
      }
  }
  return op;
}

std::vector<EigenRecord> solve_modes(const ModeOperator& op, double E_max,
                                     const SolveOptions& opts) {
  std::vector<EigenRecord> out;
  if (!std::isfinite(E_max)) throw ValidationError("E_max must be finite");
  if (E_max < op.potential_min) return out;
  const std::size_t m =
      count_below(op.matrix, std::nextafter(E_max, std::numeric_limits<double>::infinity()));
  if (m > opts.cap)
    throw SpectrumCapExceeded("mode k=" + std::to_string(op.k) + " has " + std::to_string(m) +
                              " eigenvalues below E_max, cap is " + std::to_string(opts.cap));
  std::vector<double> values = bisect_eigenvalues(op.matrix, 0, m, opts.abs_tol);

  // Cyclic block Sturm counts lose a few digits at near-degenerate pairs, so
  // periodic eigenvalues are polished by the Rayleigh quotient.
  std::vector<std::vector<double>> vecs;
  if (opts.vectors || op.matrix.periodic) {
    std::vector<double> rq;
    vecs = inverse_iteration(op.matrix, values, {}, &rq);
    if (op.matrix.periodic) {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return rq[x] < rq[y]; });
      std::vector<std::vector<double>> sorted(m);
      for (std::size_t j = 0; j < m; ++j) {
        values[j] = rq[order[j]];
        sorted[j] = std::move(vecs[order[j]]);
      }
      vecs = std::move(sorted);
    }
  }

  out.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    EigenRecord& r = out[j];
    r.E = values[j];
    r.k = op.k;
    r.h = op.h;
    r.provenance = Provenance::FiniteDifference;
    r.grid = op.grid;
    if (opts.vectors) {
      r.u = std::move(vecs[j]);
      for (std::size_t i = 0; i < r.u.size(); ++i) r.u[i] /= op.sqrt_a[i];
      double n2 = 0.0;
      for (std::size_t i = 0; i < r.u.size(); ++i) n2 += r.u[i] * r.u[i] * op.a[i];
      n2 *= kTwoPi * op.grid->spacing;
      const double scale = 1.0 / std::sqrt(n2);
      for (double& v : r.u) v *= scale;
    }
  }
  if (opts.vectors) {
    // Exactly tied eigenvalues: order by node count.
    for (std::size_t a = 0; a < m;) {
      std::size_t b = a + 1;
      while (b < m && out[b].E == out[a].E) ++b;
      if (b - a > 1)
        std::stable_sort(out.begin() + a, out.begin() + b, [](const auto& x, const auto& y) {
          return sign_changes(x.u) < sign_changes(y.u);
        });
      a = b;
    }
  }
  for (std::size_t j = 0; j < m; ++j) out[j].j = j;
  return out;
}

std::vector<double> normalized_legendre_column(int m, int lmax, double x) {
  std::vector<double> p;
  if (lmax < m) return p;
  p.resize(lmax - m + 1);
  const double sin2 = std::max(0.0, (1.0 - x) * (1.0 + x));
  double logp = 0.5 * std::log((2.0 * m + 1.0) / (2.0 * kTwoPi));
  for (int i = 1; i <= m; ++i) logp += 0.5 * std::log((2.0 * i - 1.0) / (2.0 * i));
  double pmm;
  if (m == 0) {
    pmm = std::exp(logp);
  } else if (sin2 == 0.0) {
    pmm = 0.0;
  } else {
    pmm = std::exp(logp + 0.5 * m * std::log(sin2));
  }
  p[0] = pmm;
  if (lmax == m) return p;
  p[1] = x * std::sqrt(2.0 * m + 3.0) * pmm;
  auto coef = [m](int l) {
    const double ll = static_cast<double>(l), mm = static_cast<double>(m);
    return std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm));
  };
  double a_prev = coef(m + 1);
  for (int l = m + 2; l <= lmax; ++l) {
    const double a_l = coef(l);
    p[l - m] = a_l * (x * p[l - m - 1] - p[l - m - 2] / a_prev);
    a_prev = a_l;
  }
  return p;
}

std::vector<double> exact_eigenvector(const RevolutionSurface& model, int k,
                                      long long index, const ModeGrid& grid) {
  std::vector<double> u(grid.N);
  if (model.exact_backend == ExactBackend::Sphere) {
    const int m = std::abs(k);
    const int l = static_cast<int>(index);
    for (std::size_t i = 0; i < grid.N; ++i)
      u[i] = normalized_legendre_column(m, l, std::cos(grid.nodes[i])).back();
  } else if (model.exact_backend == ExactBackend::FlatTorus) {
    for (std::size_t i = 0; i < grid.N; ++i) {
      const double s = grid.nodes[i];
      u[i] = index == 0 ? 1.0
             : index > 0 ? std::cos(static_cast<double>(index) * s)
                         : std::sin(static_cast<double>(-index) * s);
    }
  } else {
    throw NoExactBackend(model.name + " has no closed-form spectrum");
  }
  normalize_weighted(model, grid, u);
  return u;
}

std::vector<EigenRecord> exact_spectrum(const RevolutionSurface& model, int k,
                                        double h, double E_max,
                                        std::shared_ptr<const ModeGrid> grid) {
  std::vector<EigenRecord> out;
  const double h2 = h * h;
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  std::vector<long long> index;
  if (model.exact_backend == ExactBackend::Sphere) {
    for (long long l = std::abs(k);; ++l) {
      const double E = h2 * static_cast<double>(l) * static_cast<double>(l + 1);
      if (E > E_max) break;
      index.push_back(l);
      out.push_back({});
      out.back().E = E;
    }
  } else if (model.exact_backend == ExactBackend::FlatTorus) {
    for (long long m = 0;; ++m) {
      const double E = h2 * (kk + static_cast<double>(m) * static_cast<double>(m));
      if (E > E_max) break;
      for (long long sgn : {1LL, -1LL}) {
        if (m == 0 && sgn < 0) continue;
        index.push_back(sgn * m);
        out.push_back({});
        out.back().E = E;
      }
    }
  } else {
    throw NoExactBackend(model.name + " has no closed-form spectrum");
  }

  for (std::size_t j = 0; j < out.size(); ++j) {
    EigenRecord& r = out[j];
    r.k = k;
    r.h = h;
    r.j = j;
    r.provenance = Provenance::Exact;
    r.grid = grid;
  }
  if (grid && !out.empty()) {
    if (model.exact_backend == ExactBackend::Sphere) {
      // One recurrence sweep per node serves every degree.
      const int m = std::abs(k);
      const int lmax = static_cast<int>(index.back());
      for (auto& r : out) r.u.resize(grid->N);
      for (std::size_t i = 0; i < grid->N; ++i) {
        const auto col = normalized_legendre_column(m, lmax, std::cos(grid->nodes[i]));
        for (std::size_t j = 0; j < out.size(); ++j) out[j].u[i] = col[index[j] - m];
      }
      for (auto& r : out) normalize_weighted(model, *grid, r.u);
    } else {
      for (std::size_t j = 0; j < out.size(); ++j)
        out[j].u = exact_eigenvector(model, k, index[j], *grid);
    }
  }
  return out;
}

double weighted_inner(const RevolutionSurface& model, const ModeGrid& grid,
                      const std::vector<double>& u, const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.N; ++i) acc += u[i] * v[i] * model.a(grid.nodes[i]);
  return kTwoPi * acc * grid.spacing;
}

double observable_expectation(const EigenRecord& rec, const RevolutionSurface& model,
                              const RealFn& b0, const RealFn& beta) {
  if (rec.u.empty() || !rec.grid)
    throw ValidationError("eigen record carries no eigenvector");
  const ModeGrid& g = *rec.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.N; ++i)
    acc += b0(g.nodes[i]) * rec.u[i] * rec.u[i] * model.a(g.nodes[i]);
  return beta(rec.E) * kTwoPi * acc * g.spacing;
}

}  // namespace eqweyl
