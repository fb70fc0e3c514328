#include "eqweyl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "eqweyl/errors.hpp"
#include "eqweyl/quadrature.hpp"

namespace eqweyl {
namespace {

constexpr double kPi = std::numbers::pi;

// Prolate ellipse (x, z) = (sin t, B cos t), t in [0, pi], reparametrised by
// arclength. The cumulative arclength is tabulated once; inversion refines a
// table lookup by Newton steps on the exact antiderivative.
class SpheroidProfile {
 public:
  explicit SpheroidProfile(double axis_ratio, int intervals = 1024)
      : b_(axis_ratio), dt_(kPi / intervals), cumulative_(intervals + 1, 0.0) {
    for (int i = 0; i < intervals; ++i)
      cumulative_[i + 1] = cumulative_[i] + arc(i * dt_, (i + 1) * dt_);
  }

  double length() const { return cumulative_.back(); }

  double speed(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    return std::sqrt(c * c + b_ * b_ * s * s);
  }

  double parameter(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= length()) return kPi;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    const double t0 = i * dt_;
    const double frac = (s - cumulative_[i]) / (cumulative_[i + 1] - cumulative_[i]);
    double t = t0 + frac * dt_;
    for (int iter = 0; iter < 30; ++iter) {
      const double f = cumulative_[i] + arc(t0, t) - s;
      const double step = f / speed(t);
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return t;
  }

  double a(double s) const { return std::sin(parameter(s)); }
  double da(double s) const {
    const double t = parameter(s);
    return std::cos(t) / speed(t);
  }

 private:
  double arc(double t0, double t1) const {
    return quad::gauss_legendre([this](double t) { return speed(t); }, t0, t1,
                                20);
  }

  double b_;
  double dt_;
  std::vector<double> cumulative_;
};

RevolutionSurface base(std::string name, RealFn a, RealFn da, double L,
                       Boundary boundary, ExactBackend exact) {
  RevolutionSurface m;
  m.name = std::move(name);
  m.a = std::move(a);
  m.da = std::move(da);
  m.L = L;
  m.boundary = boundary;
  m.V = [](double) { return 0.0; };
  m.dV = [](double) { return 0.0; };
  m.exact_backend = exact;
  m.zero_potential = true;
  return m;
}

}  // namespace

const char* to_string(Boundary b) {
  return b == Boundary::Poles ? "poles" : "periodic";
}

const char* to_string(ExactBackend b) {
  switch (b) {
    case ExactBackend::Sphere: return "sphere";
    case ExactBackend::FlatTorus: return "flat_torus";
    default: return "none";
  }
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"sphere", "flat_torus",
                                              "bumpy_torus", "spheroid"};
  return names;
}

RevolutionSurface builtin_model(const std::string& name) {
  if (name == "sphere") {
    return base(
        name, [](double s) { return std::sin(s); },
        [](double s) { return std::cos(s); }, kPi, Boundary::Poles,
        ExactBackend::Sphere);
  }
  if (name == "flat_torus") {
    return base(
        name, [](double) { return 1.0; }, [](double) { return 0.0; },
        2.0 * kPi, Boundary::Periodic, ExactBackend::FlatTorus);
  }
  if (name == "bumpy_torus") {
    return base(
        name, [](double s) { return 1.0 + 0.3 * std::cos(s); },
        [](double s) { return -0.3 * std::sin(s); }, 2.0 * kPi,
        Boundary::Periodic, ExactBackend::None);
  }
  if (name == "spheroid") {
    auto prof = std::make_shared<const SpheroidProfile>(1.5);
    return base(
        name, [prof](double s) { return prof->a(s); },
        [prof](double s) { return prof->da(s); }, prof->length(),
        Boundary::Poles, ExactBackend::None);
  }
  throw UnknownModel("unknown model '" + name + "'");
}

RevolutionSurface with_potential(RevolutionSurface model, RealFn V, RealFn dV,
                                 bool zero_potential) {
  if (!dV) {
    dV = [V](double s) {
      const double e = 1e-6;
      return (V(s + e) - V(s - e)) / (2 * e);
    };
  }
  model.V = std::move(V);
  model.dV = std::move(dV);
  model.zero_potential = zero_potential;
  if (!zero_potential) model.exact_backend = ExactBackend::None;
  return model;
}

void validate(const RevolutionSurface& m) {
  if (!(m.L > 0.0) || !m.a || !m.V) throw InvalidModel(m.name + ": incomplete model");
  const int samples = 2001;
  double amin = std::numeric_limits<double>::infinity();
  for (int i = 1; i < samples; ++i) {
    const double s = m.L * i / samples;
    const double a = m.a(s);
    if (!(a > 0.0)) throw InvalidModel(m.name + ": profile not positive in interior");
    amin = std::min(amin, a);
    if (!std::isfinite(m.V(s))) throw InvalidModel(m.name + ": potential not finite");
  }
  if (m.boundary == Boundary::Poles) {
    const double tol = 1e-10;
    if (std::abs(m.a(0.0)) > tol || std::abs(m.a(m.L)) > tol)
      throw InvalidModel(m.name + ": profile must vanish at poles");
    if (std::abs(m.da(0.0) - 1.0) > tol || std::abs(m.da(m.L) + 1.0) > tol)
      throw InvalidModel(m.name + ": |a'| must be 1 at poles");
  } else {
    if (!(std::min(amin, m.a(0.0)) > 0.0))
      throw InvalidModel(m.name + ": periodic profile must stay positive");
    if (std::abs(m.a(0.0) - m.a(m.L)) > 1e-10)
      throw InvalidModel(m.name + ": profile not periodic");
  }
}

ActionProfile action_profile(const RevolutionSurface& m) {
  ActionProfile p;
  p.kappa = 1;
  p.principal_isotropy_order = 1;
  if (m.boundary == Boundary::Poles) {
    p.fixed_points = {0.0, m.L};
    p.Lambda = 2;
  } else {
    p.Lambda = 1;
  }
  return p;
}

OrbitVolume orbit_volume(const RevolutionSurface& m, double s) {
  if (m.boundary == Boundary::Poles && (s <= 0.0 || s >= m.L))
    return {1.0, true};
  const double a = m.a(s);
  if (a == 0.0) return {1.0, true};
  return {2.0 * kPi * a, false};
}

double hamiltonian_p(const RevolutionSurface& m, const PhasePoint& pt) {
  const double a = m.a(pt.s);
  return pt.sigma * pt.sigma + pt.p_phi * pt.p_phi / (a * a) + m.V(pt.s);
}

double potential_min(const RevolutionSurface& m, int samples) {
  double v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) v = std::min(v, m.V(m.L * i / samples));
  return v;
}

double potential_max(const RevolutionSurface& m, int samples) {
  double v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) v = std::max(v, m.V(m.L * i / samples));
  return v;
}

double surface_integral(const RevolutionSurface& m, const SurfaceFn& f,
                        double tol) {
  quad::Tolerance t{tol, tol};
  auto outer = [&](double s) {
    auto inner = [&](double phi) { return f(s, phi); };
    return m.a(s) * quad::adaptive(inner, 0.0, 2.0 * kPi, t).value;
  };
  return quad::adaptive(outer, 0.0, m.L, t).value;
}

double fiber_integral(const RevolutionSurface& m, const SurfaceFn& f,
                      double tol) {
  quad::Tolerance t{tol, tol};
  auto outer = [&](double s) {
    const double avg = quad::periodic_mean([&](double phi) { return f(s, phi); });
    const OrbitVolume ov = orbit_volume(m, s);
    return ov.fixed_point ? 0.0 : ov.value * avg;
  };
  return quad::adaptive(outer, 0.0, m.L, t).value;
}

}  // namespace eqweyl
