#pragma once

// Circle-symmetric model surfaces: SO(2) acting on a surface of revolution
// with metric ds^2 + a(s)^2 dphi^2 and an invariant potential V(s).

#include <functional>
#include <string>
#include <vector>

namespace eqweyl {

using RealFn = std::function<double(double)>;

enum class Boundary { Poles, Periodic };
enum class ExactBackend { None, Sphere, FlatTorus };

const char* to_string(Boundary b);
const char* to_string(ExactBackend b);

struct RevolutionSurface {
  std::string name;
  RealFn a;   // profile, arclength parametrised
  RealFn da;  // a'(s)
  double L = 0.0;
  Boundary boundary = Boundary::Poles;
  RealFn V;   // invariant potential
  RealFn dV;  // V'(s)
  ExactBackend exact_backend = ExactBackend::None;
  bool zero_potential = true;
};

struct ActionProfile {
  int kappa = 1;
  int Lambda = 1;
  int principal_isotropy_order = 1;
  std::vector<double> fixed_points;
};

struct PhasePoint {
  double s = 0.0;
  double phi = 0.0;
  double sigma = 0.0;  // momentum conjugate to s
  double p_phi = 0.0;  // angular momentum; p_phi = 0 is the zero momentum level
};

/// Names accepted by builtin_model, in catalog order.
const std::vector<std::string>& builtin_names();

/// sphere, flat_torus, bumpy_torus or spheroid; throws UnknownModel.
RevolutionSurface builtin_model(const std::string& name);

/// Replaces the potential. Drops the exact backend when V is nonzero, since
/// the closed-form spectra assume V = 0. `dV` is differenced if empty.
RevolutionSurface with_potential(RevolutionSurface model, RealFn V,
                                 RealFn dV = {}, bool zero_potential = false);

/// Throws InvalidModel when an invariant of RevolutionSurface fails.
void validate(const RevolutionSurface& model);

ActionProfile action_profile(const RevolutionSurface& model);

struct OrbitVolume {
  double value = 0.0;
  bool fixed_point = false;  // counting-measure convention, value == 1
};

/// Length 2 pi a(s) of the orbit through s; fixed points report 1 with the flag.
OrbitVolume orbit_volume(const RevolutionSurface& model, double s);

/// p = sigma^2 + p_phi^2 / a(s)^2 + V(s).
double hamiltonian_p(const RevolutionSurface& model, const PhasePoint& pt);

/// Minimum of V over a dense sample.
double potential_min(const RevolutionSurface& model, int samples = 4001);
double potential_max(const RevolutionSurface& model, int samples = 4001);

using SurfaceFn = std::function<double(double s, double phi)>;

/// Integral of f over M with the area element a(s) ds dphi (2D quadrature).
double surface_integral(const RevolutionSurface& model, const SurfaceFn& f,
                        double tol = 1e-12);

/// Same integral written as the base integral of 2 pi a(s) <f>_G(s).
double fiber_integral(const RevolutionSurface& model, const SurfaceFn& f,
                      double tol = 1e-12);

}  // namespace eqweyl
