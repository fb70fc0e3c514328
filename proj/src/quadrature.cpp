#include "eqweyl/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace eqweyl::quad {
namespace {

// GSL aborts on error by default; we inspect status codes instead.
[[maybe_unused]] const bool kHandlerOff = [] {
  gsl_set_error_handler_off();
  return true;
}();

double trampoline(double x, void* params) {
  return (*static_cast<const Integrand*>(params))(x);
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const {
    gsl_integration_workspace_free(w);
  }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;

Workspace make_workspace(std::size_t limit) {
  return Workspace(gsl_integration_workspace_alloc(limit));
}

gsl_function wrap(const Integrand& f) {
  gsl_function g;
  g.function = &trampoline;
  g.params = const_cast<Integrand*>(&f);
  return g;
}

}  // namespace

Result adaptive(const Integrand& f, double a, double b, Tolerance tol) {
  Result r;
  if (a == b) return r;
  auto ws = make_workspace(tol.limit);
  gsl_function g = wrap(f);
  r.status = gsl_integration_qag(&g, a, b, tol.abs, tol.rel, tol.limit,
                                 GSL_INTEG_GAUSS61, ws.get(), &r.value,
                                 &r.abserr);
  return r;
}

Result singular(const Integrand& f, double a, double b, Tolerance tol) {
  Result r;
  if (a == b) return r;
  auto ws = make_workspace(tol.limit);
  gsl_function g = wrap(f);
  r.status = gsl_integration_qags(&g, a, b, tol.abs, tol.rel, tol.limit,
                                  ws.get(), &r.value, &r.abserr);
  return r;
}

Result with_breakpoints(const Integrand& f, double a, double b,
                        std::span<const double> points, Tolerance tol) {
  if (a == b) return {};
  const double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> pts{lo};
  for (double p : points)
    if (p > lo && p < hi) pts.push_back(p);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  Result r;
  auto ws = make_workspace(tol.limit);
  gsl_function g = wrap(f);
  r.status = gsl_integration_qagp(&g, pts.data(), pts.size(), tol.abs,
                                  tol.rel, tol.limit, ws.get(), &r.value,
                                  &r.abserr);
  if (a > b) r.value = -r.value;
  return r;
}

double periodic_mean(const Integrand& f, int m) {
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += f(2.0 * std::numbers::pi * i / m);
  return sum / m;
}

double gauss_legendre(const Integrand& f, double a, double b, int n) {
  static std::mutex mu;
  static std::map<int, gsl_integration_glfixed_table*> tables;
  gsl_integration_glfixed_table* t = nullptr;
  {
    std::lock_guard lock(mu);
    auto& slot = tables[n];
    if (!slot) slot = gsl_integration_glfixed_table_alloc(n);
    t = slot;
  }
  gsl_function g = wrap(f);
  return gsl_integration_glfixed(&g, a, b, t);
}

}  // namespace eqweyl::quad
