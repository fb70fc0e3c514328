#pragma once

// Reduced phase space of the circle action at zero angular momentum:
// coordinates (s, sigma) with reduced Hamiltonian sigma^2 + V(s). Level curves,
// their thin-shell measure, and the phase-space integrals forming the leading
// terms of the Weyl laws and the trace formula.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "eqweyl/geometry.hpp"
#include "eqweyl/mollify.hpp"
#include "eqweyl/quadrature.hpp"

namespace eqweyl {

using PhaseSymbol = std::function<double(const PhasePoint&)>;
/// A symbol already averaged over the orbits, as a function of (s, sigma).
using ReducedSymbol = std::function<double(double s, double sigma)>;

/// Orbit average of b at (s, sigma, p_phi) by the periodic trapezoid rule.
double averaged_symbol(const PhaseSymbol& b, double s, double sigma, double p_phi,
                       int samples = 64);

/// (s, sigma) -> averaged_symbol(b, s, sigma, 0).
ReducedSymbol orbit_average(PhaseSymbol b, int samples = 64);

/// sigma^2 + V(s).
double reduced_hamiltonian(const RevolutionSurface& model, double s, double sigma);

/// Sorted solutions of V(s) = level in [0, L], located on a uniform sample and
/// refined by Brent's method.
std::vector<double> level_crossings(const RevolutionSurface& model, double level,
                                    int samples = 4096);

struct AllowedInterval {
  double lo = 0.0, hi = 0.0;
  bool lo_turning = false, hi_turning = false;  // V = c at the end (not a domain end)
};

/// The curve sigma^2 + V(s) = c: two branches sigma = +-sqrt(c - V(s)) over the
/// classically allowed set, carrying the thin-shell density 1/sqrt(c - V(s)).
struct ReducedHypersurface {
  const RevolutionSurface* model = nullptr;
  double c = 0.0;
  std::vector<AllowedInterval> allowed;

  double density(double s) const;
  double branch(double s) const;  // sqrt(c - V(s)), upper branch
};

/// Throws NonRegularValue when V has a critical point on the level c.
ReducedHypersurface reduced_hypersurface(const RevolutionSurface& model, double c);

/// Integral over the allowed set of (g(s, sigma+) + g(s, sigma-)) / (2 sqrt(c - V)).
/// Simple turning points are handled by the substitution u = sqrt(c - V(s)).
quad::Result shell_integral(const RevolutionSurface& model, double c,
                            const ReducedSymbol& g);

/// Thin-shell volume of the reduced level curve.
double reduced_volume(const RevolutionSurface& model, double c);

/// Integral of the orbit-averaged symbol over the reduced level curve.
double sigma_c_integral(const RevolutionSurface& model, double c, const ReducedSymbol& b);

/// (1/eps) times the integral of f over the shell c <= sigma^2 + V <= c + eps,
/// computed by nested adaptive quadrature. Throws ZeroShell if the shell is empty.
double thin_shell_measure(const RevolutionSurface& model, double c, double eps,
                          const ReducedSymbol& f);

/// Integral over (s, sigma) of b(s, sigma) rho(sigma^2 + V(s)).
double omega_weighted_integral(const RevolutionSurface& model, const ReducedSymbol& b,
                               const TestFunction& rho);

struct ReducedVolumeRow {
  double c = 0.0;
  double volume = 0.0;
  std::string method;
  double error_estimate = 0.0;
};

/// Columns (c, volume, method, error_estimate).
void write_reduced_volume_csv(std::ostream& os, const std::vector<ReducedVolumeRow>& rows);

}  // namespace eqweyl
