#include "eqweyl/reduction.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>

#include "eqweyl/errors.hpp"

namespace eqweyl {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCriticalTol = 1e-8;
const quad::Tolerance kShellTol{1e-13, 1e-12};

// Root of f in [lo, hi] with f(lo), f(hi) of opposite sign (or one zero).
double brent_root(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  gsl_function F;
  F.function = [](double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); };
  F.params = const_cast<std::function<double(double)>*>(&f);
  std::unique_ptr<gsl_root_fsolver, decltype(&gsl_root_fsolver_free)> solver(
      gsl_root_fsolver_alloc(gsl_root_fsolver_brent), &gsl_root_fsolver_free);
  gsl_root_fsolver_set(solver.get(), &F, lo, hi);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    gsl_root_fsolver_iterate(solver.get());
    x = gsl_root_fsolver_root(solver.get());
    const double a = gsl_root_fsolver_x_lower(solver.get());
    const double b = gsl_root_fsolver_x_upper(solver.get());
    if (gsl_root_test_interval(a, b, 0.0, 4.0 * std::numeric_limits<double>::epsilon()) ==
        GSL_SUCCESS)
      break;
  }
  return x;
}

std::vector<double> sample_points(const RevolutionSurface& m, int n) {
  std::vector<double> s(n + 1);
  for (int i = 0; i <= n; ++i) s[i] = m.L * i / n;
  s[n] = m.L;
  return s;
}

double second_derivative(const RevolutionSurface& m, double s) {
  const double e = 1e-5 * m.L;
  const double a = std::max(0.0, s - e), b = std::min(m.L, s + e);
  return (m.dV(b) - m.dV(a)) / (b - a);
}

// Width w of the neighbourhood [t, t + dir w] of a turning point t in which
// V is monotone and |V''| w <= 0.1 |V'| holds at the far end.
double turning_width(const RevolutionSurface& m, double t, int dir, double max_w) {
  const double sign0 = std::copysign(1.0, m.dV(t));
  double w = max_w;
  for (int it = 0; it < 60; ++it, w *= 0.5) {
    const double e = t + dir * w;
    const double d1 = m.dV(e);
    if (std::copysign(1.0, d1) != sign0) continue;
    if (std::abs(second_derivative(m, e)) * w > 0.1 * std::abs(d1)) continue;
    bool monotone = true;
    for (int q = 1; q <= 16 && monotone; ++q)
      monotone = std::copysign(1.0, m.dV(t + dir * w * q / 16.0)) == sign0;
    if (monotone) return w;
  }
  return w;
}

// Integral of g / sqrt(c - V) over [t, t + dir w] starting at a simple turning
// point t, in the variable u = sqrt(c - V(s)): ds / u = 2 du / |V'(s)|.
quad::Result turning_piece(const RevolutionSurface& m, double c, double t, int dir,
                           double w, const std::function<double(double, double)>& g) {
  const double far = t + dir * w;
  const double u1 = std::sqrt(std::max(0.0, c - m.V(far)));
  auto position = [&](double u) {
    const double target = u * u;
    auto F = [&](double s) { return (c - m.V(s)) - target; };
    const double lo = std::min(t, far), hi = std::max(t, far);
    if (F(t) >= 0.0) return t;
    if (F(far) <= 0.0) return far;
    return brent_root(F, lo, hi);
  };
  auto integrand = [&](double u) {
    const double s = position(u);
    return 2.0 * g(s, u) / std::abs(m.dV(s));
  };
  return quad::adaptive(integrand, 0.0, u1, kShellTol);
}

quad::Result add(quad::Result a, const quad::Result& b) {
  a.value += b.value;
  a.abserr += b.abserr;
  a.status = a.status ? a.status : b.status;
  return a;
}

}  // namespace

double averaged_symbol(const PhaseSymbol& b, double s, double sigma, double p_phi,
                       int samples) {
  return quad::periodic_mean(
      [&](double phi) { return b(PhasePoint{s, phi, sigma, p_phi}); }, samples);
}

ReducedSymbol orbit_average(PhaseSymbol b, int samples) {
  return [b = std::move(b), samples](double s, double sigma) {
    return averaged_symbol(b, s, sigma, 0.0, samples);
  };
}

double reduced_hamiltonian(const RevolutionSurface& model, double s, double sigma) {
  return sigma * sigma + model.V(s);
}

std::vector<double> level_crossings(const RevolutionSurface& model, double level,
                                    int samples) {
  const auto s = sample_points(model, samples);
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) f[i] = model.V(s[i]) - level;
  std::vector<double> roots;
  auto F = [&](double x) { return model.V(x) - level; };
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (f[i] == 0.0) {
      roots.push_back(s[i]);
    } else if ((f[i] < 0.0) != (f[i + 1] < 0.0) && f[i + 1] != 0.0) {
      roots.push_back(brent_root(F, s[i], s[i + 1]));
    }
  }
  if (f.back() == 0.0) roots.push_back(s.back());
  if (model.boundary == Boundary::Periodic && roots.size() >= 2 && roots.front() == 0.0 &&
      roots.back() == model.L)
    roots.pop_back();
  return roots;
}

double ReducedHypersurface::density(double s) const {
  return 1.0 / std::sqrt(c - model->V(s));
}

double ReducedHypersurface::branch(double s) const { return std::sqrt(c - model->V(s)); }

ReducedHypersurface reduced_hypersurface(const RevolutionSurface& model, double c) {
  ReducedHypersurface hs;
  hs.model = &model;
  hs.c = c;
  const int n = 4096;
  const auto s = sample_points(model, n);
  const double tol = kCriticalTol * std::max(1.0, std::abs(c));

  auto not_regular = [&](double x) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "c = %.17g is not a regular value: V'(%.6g) = %.3g on the level",
                  c, x, model.dV(x));
    throw NonRegularValue(buf);
  };

  // Critical points of V lying on the level.
  std::vector<double> d(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    d[i] = model.dV(s[i]);
    if (std::abs(model.V(s[i]) - c) <= tol && std::abs(d[i]) <= kCriticalTol) not_regular(s[i]);
  }
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if ((d[i] < 0.0) != (d[i + 1] < 0.0) && d[i] != 0.0 && d[i + 1] != 0.0) {
      const double x = brent_root(model.dV, s[i], s[i + 1]);
      if (std::abs(model.V(x) - c) <= tol) not_regular(x);
    }
  }
  if (model.boundary == Boundary::Poles)
    for (double x : {0.0, model.L})
      if (std::abs(model.V(x) - c) <= tol) not_regular(x);

  const auto roots = level_crossings(model, c, n);
  for (double r : roots)
    if (std::abs(model.dV(r)) <= kCriticalTol) not_regular(r);

  // Walk the pieces between consecutive roots and keep the allowed ones.
  std::vector<double> cuts{0.0};
  cuts.insert(cuts.end(), roots.begin(), roots.end());
  cuts.push_back(model.L);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi <= lo) continue;
    if (model.V(0.5 * (lo + hi)) >= c) continue;
    const bool lt = std::find(roots.begin(), roots.end(), lo) != roots.end();
    const bool ht = std::find(roots.begin(), roots.end(), hi) != roots.end();
    hs.allowed.push_back({lo, hi, lt, ht});
  }
  return hs;
}

quad::Result shell_integral(const RevolutionSurface& model, double c, const ReducedSymbol& g) {
  const ReducedHypersurface hs = reduced_hypersurface(model, c);
  auto symmetric = [&](double s, double u) { return 0.5 * (g(s, u) + g(s, -u)); };
  quad::Result total;
  for (const auto& iv : hs.allowed) {
    double a = iv.lo, b = iv.hi;
    const double half = 0.5 * (b - a);
    if (iv.lo_turning) {
      const double w = turning_width(model, iv.lo, +1, iv.hi_turning ? half : 2.0 * half);
      total = add(total, turning_piece(model, c, iv.lo, +1, w, symmetric));
      a += w;
    }
    if (iv.hi_turning) {
      const double w = turning_width(model, iv.hi, -1, iv.lo_turning ? half : b - a);
      total = add(total, turning_piece(model, c, iv.hi, -1, w, symmetric));
      b -= w;
    }
    if (b > a) {
      auto f = [&](double s) {
        const double u = hs.branch(s);
        return symmetric(s, u) / u;
      };
      total = add(total, quad::adaptive(f, a, b, kShellTol));
    }
  }
  return total;
}

double sigma_c_integral(const RevolutionSurface& model, double c, const ReducedSymbol& b) {
  return shell_integral(model, c, b).value;
}

double reduced_volume(const RevolutionSurface& model, double c) {
  return sigma_c_integral(model, c, [](double, double) { return 1.0; });
}

double thin_shell_measure(const RevolutionSurface& model, double c, double eps,
                          const ReducedSymbol& f) {
  if (!(eps > 0.0)) throw ValidationError("shell width must be positive");
  if (potential_min(model) >= c + eps)
    throw ZeroShell("shell [c, c + eps] lies below the potential minimum");
  const quad::Tolerance tol{1e-14, 1e-12};
  auto inner = [&](double s) {
    const double v = model.V(s);
    const double top = c + eps - v;
    if (top <= 0.0) return 0.0;
    const double hi = std::sqrt(top);
    auto fs = [&](double sigma) { return f(s, sigma); };
    if (c - v <= 0.0) return quad::adaptive(fs, -hi, hi, tol).value;
    const double lo = std::sqrt(c - v);
    return quad::adaptive(fs, lo, hi, tol).value + quad::adaptive(fs, -hi, -lo, tol).value;
  };
  std::vector<double> pts = level_crossings(model, c);
  const auto more = level_crossings(model, c + eps);
  pts.insert(pts.end(), more.begin(), more.end());
  const auto r = quad::with_breakpoints(inner, 0.0, model.L, pts, tol);
  return r.value / eps;
}

double omega_weighted_integral(const RevolutionSurface& model, const ReducedSymbol& b,
                               const TestFunction& rho) {
  const auto& energies = rho.breakpoints();
  const quad::Tolerance tol{1e-14, 1e-12};
  auto inner = [&](double s) {
    const double v = model.V(s);
    const double top = energies.back() - v;
    if (top <= 0.0) return 0.0;
    const double smax = std::sqrt(top);
    std::vector<double> pts{0.0};
    for (double e : energies)
      if (e > v) {
        pts.push_back(std::sqrt(e - v));
        pts.push_back(-std::sqrt(e - v));
      }
    auto fs = [&](double sigma) { return b(s, sigma) * rho(sigma * sigma + v); };
    return quad::with_breakpoints(fs, -smax, smax, pts, tol).value;
  };
  std::vector<double> pts;
  for (double e : energies) {
    const auto r = level_crossings(model, e);
    pts.insert(pts.end(), r.begin(), r.end());
  }
  return quad::with_breakpoints(inner, 0.0, model.L, pts, tol).value;
}

void write_reduced_volume_csv(std::ostream& os, const std::vector<ReducedVolumeRow>& rows) {
  os << "c,volume,method,error_estimate\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g\n", r.c, r.volume, r.method.c_str(),
                  r.error_estimate);
    os << buf;
  }
}

}  // namespace eqweyl
