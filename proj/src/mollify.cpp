#include "eqweyl/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "eqweyl/errors.hpp"
#include "eqweyl/quadrature.hpp"

namespace eqweyl {
namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Derivatives of g(t) = 1 - 1/(1 - t^2) = 1 - (1/(1-t) + 1/(1+t))/2.
double exponent_derivative(int m, double t) {
  if (m == 0) return 1.0 - 1.0 / ((1.0 - t) * (1.0 + t));
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return -0.5 * factorial(m) *
         (std::pow(1.0 - t, -(m + 1)) + sign * std::pow(1.0 + t, -(m + 1)));
}

double bump_integral() {
  static const double z =
      quad::adaptive([](double t) { return unit_bump(0, t); }, -1.0, 1.0, {1e-15, 1e-14})
          .value;
  return z;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

TestFunction::TestFunction(Evaluator f, double lo, double hi, double scale_exponent,
                           std::vector<double> breakpoints,
                           std::array<double, kMaxDerivative + 1> constants)
    : f_(std::move(f)),
      lo_(lo),
      hi_(hi),
      scale_exponent_(scale_exponent),
      breakpoints_(merged(std::move(breakpoints), {lo, hi})),
      constants_(constants) {
  breakpoints_.erase(std::remove_if(breakpoints_.begin(), breakpoints_.end(),
                                    [&](double x) { return x < lo_ || x > hi_; }),
                     breakpoints_.end());
}

double TestFunction::derivative(int j, double x) const {
  if (j < 0 || j > kMaxDerivative) throw ValidationError("derivative order out of range");
  if (!f_ || x <= lo_ || x >= hi_) return 0.0;
  return f_(j, x);
}

double unit_bump(int j, double t) {
  if (t <= -1.0 || t >= 1.0) return 0.0;
  const double psi = std::exp(exponent_derivative(0, t));
  if (j == 0) return psi;
  // psi^(n+1) = sum_i C(n, i) g^(i+1) psi^(n-i)
  std::array<double, kMaxDerivative + 1> d{};
  d[0] = psi;
  for (int n = 0; n < j; ++n) {
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) acc += binomial(n, i) * exponent_derivative(i + 1, t) * d[n - i];
    d[n + 1] = acc;
  }
  return d[j];
}

double smooth_step(int j, double t) {
  if (j > 0) return unit_bump(j - 1, t) / bump_integral();
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const quad::Tolerance tol{1e-16, 1e-14};
  auto psi = [](double u) { return unit_bump(0, u); };
  // Integrate over the shorter tail for accuracy near the ends.
  if (t <= 0.0) return quad::adaptive(psi, -1.0, t, tol).value / bump_integral();
  return 1.0 - quad::adaptive(psi, t, 1.0, tol).value / bump_integral();
}

double smooth_step_constant(int j) {
  static std::once_flag once;
  static std::array<double, kMaxDerivative + 1> table{};
  std::call_once(once, [] {
    table[0] = 1.0;
    const int n = 20000;
    for (int q = 1; q <= kMaxDerivative; ++q) {
      double m = 0.0;
      for (int i = 1; i < n; ++i) m = std::max(m, std::abs(smooth_step(q, -1.0 + 2.0 * i / n)));
      // Sampling misses the true peak by a hair; pad slightly.
      table[q] = m * 1.01;
    }
  });
  return table.at(j);
}

TestFunction bump(double center, double width, double height, double scale_exponent) {
  if (!(width > 0.0)) throw ValidationError("bump width must be positive");
  std::array<double, kMaxDerivative + 1> consts{};
  const int n = 20000;
  for (int j = 0; j <= kMaxDerivative; ++j) {
    double m = 0.0;
    for (int i = 1; i < n; ++i) m = std::max(m, std::abs(unit_bump(j, -1.0 + 2.0 * i / n)));
    consts[j] = std::abs(height) * m * 1.01 / std::pow(width, j);
  }
  consts[0] = std::abs(height);
  auto f = [center, width, height](int j, double x) {
    return height * unit_bump(j, (x - center) / width) / std::pow(width, j);
  };
  return TestFunction(f, center - width, center + width, scale_exponent, {center}, consts);
}

namespace {

struct WindowGeometry {
  double c, H, eta;
  double left_center, right_center;  // shoulder midpoints in x
  double x_scale;                    // H * eta, the x-width per unit step argument
};

WindowGeometry window_geometry(double c, double h, double delta, double lambda,
                               WindowKind kind) {
  if (!(h > 0.0 && h <= 1.0) || !(delta > 0.0) || !(lambda > 0.0))
    throw ValidationError("window needs h in (0, 1], delta > 0, lambda > 0");
  const double eta = std::pow(h, lambda);
  if (3.0 * eta >= 0.5)
    throw ShoulderTooWide("shoulder 3 h^lambda = " + std::to_string(3.0 * eta) +
                          " must stay below 1/2");
  const double H = std::pow(h, delta);
  const double inset = kind == WindowKind::Inner ? 2.0 * eta : -2.0 * eta;
  // y = (x - c)/H - 1/2; shoulders centred at y = -1/2 + inset and 1/2 - inset.
  return {c, H, eta, c + H * inset, c + H * (1.0 - inset), H * eta};
}

// Product of a rising step at `lc` and a falling step at `rc`, both of x-width
// `w` per unit argument, differentiated by Leibniz.
double step_pair(int j, double x, double lc, double rc, double w) {
  const double a = (x - lc) / w;
  const double b = (rc - x) / w;
  double acc = 0.0;
  for (int i = 0; i <= j; ++i) {
    const double left = smooth_step(i, a);
    if (left == 0.0) continue;
    const double right = smooth_step(j - i, b) * ((j - i) % 2 == 0 ? 1.0 : -1.0);
    acc += binomial(j, i) * left * right;
  }
  return acc / std::pow(w, j);
}

}  // namespace

TestFunction mollified_window(double c, double h, double delta, double lambda,
                              WindowKind kind) {
  const WindowGeometry g = window_geometry(c, h, delta, lambda, kind);
  std::array<double, kMaxDerivative + 1> consts{};
  for (int j = 0; j <= kMaxDerivative; ++j) consts[j] = smooth_step_constant(j);
  const double w = g.x_scale;
  auto f = [g, w](int j, double x) {
    return step_pair(j, x, g.left_center, g.right_center, w);
  };
  return TestFunction(f, g.left_center - w, g.right_center + w, lambda + delta,
                      {g.left_center, g.left_center + w, g.right_center - w, g.right_center},
                      consts);
}

TestFunction window_shoulders(double c, double h, double delta, double lambda) {
  const WindowGeometry in = window_geometry(c, h, delta, lambda, WindowKind::Inner);
  const WindowGeometry out = window_geometry(c, h, delta, lambda, WindowKind::Outer);
  const double w = in.x_scale;
  auto f = [in, out, w](int j, double x) {
    double acc = 0.0;
    for (int i = 0; i <= j; ++i) {
      const double o = step_pair(i, x, out.left_center, out.right_center, w);
      if (o == 0.0) continue;
      double rest = -step_pair(j - i, x, in.left_center, in.right_center, w);
      if (j - i == 0) rest += 1.0;
      acc += binomial(j, i) * o * rest;
    }
    return acc;
  };
  std::array<double, kMaxDerivative + 1> consts{};
  for (int j = 0; j <= kMaxDerivative; ++j) {
    double s = 0.0;
    for (int i = 0; i <= j; ++i)
      s += binomial(j, i) * smooth_step_constant(i) * smooth_step_constant(j - i);
    consts[j] = j == 0 ? 1.0 : s;
  }
  std::vector<double> bps{out.left_center - w, out.left_center + w, in.left_center - w,
                          in.left_center + w,  in.right_center - w, in.right_center + w,
                          out.right_center - w, out.right_center + w};
  return TestFunction(f, out.left_center - w, out.right_center + w, lambda + delta, bps,
                      consts);
}

double derivative_bound_check(const TestFunction& tf, double h, int j,
                              int samples_per_piece) {
  const auto& bp = tf.breakpoints();
  double m = 0.0;
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const double a = bp[p], b = bp[p + 1];
    for (int i = 0; i <= samples_per_piece; ++i) {
      const double x = a + (b - a) * i / samples_per_piece;
      m = std::max(m, std::abs(tf.derivative(j, x)));
    }
  }
  return m * std::pow(h, tf.scale_exponent() * j);
}

}  // namespace eqweyl
