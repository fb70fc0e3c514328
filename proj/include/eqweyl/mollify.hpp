#pragma once

// Compactly supported smooth test functions with analytic derivatives: the
// exp-bump, its normalised primitive (a smooth step), and the inner/outer
// spectral windows built from pairs of smooth steps.

#include <array>
#include <functional>
#include <utility>
#include <vector>

namespace eqweyl {

inline constexpr int kMaxDerivative = 6;

class TestFunction {
 public:
  /// evaluator(j, x) returns the j-th derivative at x, j <= kMaxDerivative.
  using Evaluator = std::function<double(int, double)>;

  TestFunction() = default;
  TestFunction(Evaluator f, double lo, double hi, double scale_exponent,
               std::vector<double> breakpoints,
               std::array<double, kMaxDerivative + 1> constants);

  double operator()(double x) const { return derivative(0, x); }
  /// Zero outside the support by construction.
  double derivative(int j, double x) const;

  std::pair<double, double> support() const { return {lo_, hi_}; }
  double scale_exponent() const { return scale_exponent_; }
  /// Sorted points (support ends included) between which the function is
  /// smooth and either constant or a single transition.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  /// C_j with sup |f^(j)| <= C_j h^{-scale_exponent j}.
  double constant(int j) const { return constants_.at(j); }

 private:
  Evaluator f_;
  double lo_ = 0.0, hi_ = 0.0;
  double scale_exponent_ = 0.0;
  std::vector<double> breakpoints_;
  std::array<double, kMaxDerivative + 1> constants_{};
};

/// j-th derivative of psi(t) = exp(1 - 1/(1 - t^2)) on (-1, 1), zero outside.
double unit_bump(int j, double t);

/// Smooth step: 0 for t <= -1, 1 for t >= 1, normalised primitive of the bump.
double smooth_step(int j, double t);

/// sup |smooth_step^(j)|, j <= kMaxDerivative (sampled once, cached).
double smooth_step_constant(int j);

/// height * psi((x - center) / width), supported on [center - width, center + width].
TestFunction bump(double center, double width, double height,
                  double scale_exponent = 0.0);

enum class WindowKind { Inner, Outer };

/// Smooth approximation of the indicator of [c, c + h^delta] with shoulder
/// width eta = h^lambda in the rescaled variable y = (x - c)/h^delta - 1/2:
/// Inner is supported in |y| <= 1/2 - eta and equals 1 on |y| <= 1/2 - 3 eta;
/// Outer is supported in |y| <= 1/2 + 3 eta and equals 1 on |y| <= 1/2 + eta.
/// Throws ShoulderTooWide when 3 eta >= 1/2.
TestFunction mollified_window(double c, double h, double delta, double lambda,
                              WindowKind kind);

/// outer * (1 - inner): the two shoulder bands of the window pair.
TestFunction window_shoulders(double c, double h, double delta, double lambda);

/// max over a dense sample of |tf^(j)| h^{scale_exponent j}.
double derivative_bound_check(const TestFunction& tf, double h, int j,
                              int samples_per_piece = 4000);

}  // namespace eqweyl
