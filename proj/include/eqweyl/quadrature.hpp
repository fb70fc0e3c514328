#pragma once

// Thin wrappers around the QUADPACK routines shipped with GSL.

#include <functional>
#include <span>
#include <vector>

namespace eqweyl::quad {

using Integrand = std::function<double(double)>;

struct Result {
  double value = 0.0;
  double abserr = 0.0;
  int status = 0;  // GSL status code, 0 on success
};

struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-11;
  std::size_t limit = 2000;
};

/// Adaptive Gauss-Kronrod (QAG, 61-point rule) on [a, b].
Result adaptive(const Integrand& f, double a, double b, Tolerance tol = {});

/// QAGS: adaptive with epsilon extrapolation; tolerates integrable endpoint
/// singularities.
Result singular(const Integrand& f, double a, double b, Tolerance tol = {});

/// QAGP with known interior breakpoints. `points` need not include a and b
/// and may be unsorted; points outside (a, b) are dropped.
Result with_breakpoints(const Integrand& f, double a, double b,
                        std::span<const double> points, Tolerance tol = {});

/// Mean of a 2π-periodic function by the M-point trapezoid rule.
double periodic_mean(const Integrand& f, int m = 64);

/// Fixed n-point Gauss-Legendre rule on [a, b].
double gauss_legendre(const Integrand& f, double a, double b, int n = 20);

}  // namespace eqweyl::quad
