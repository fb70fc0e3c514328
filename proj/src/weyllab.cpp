#include "eqweyl/weyllab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "eqweyl/errors.hpp"

namespace eqweyl {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neumaier-compensated running sum; spectra at small h contribute up to
// ~1e8 terms.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double moment_from_vector(const EigenRecord& r, const RevolutionSurface& model,
                          const Observable& obs) {
  if (obs.b0_constant) return *obs.b0_constant;
  return observable_expectation(r, model, obs.b0, [](double) { return 1.0; });
}

// Moment of b0 for an exact eigenfunction without a closed form: sampled on a
// grid fine enough to resolve it.
double sampled_exact_moment(const RevolutionSurface& model, int k, long long index,
                            const Observable& obs) {
  const auto n = static_cast<std::size_t>(std::max<long long>(512, 16 * (std::llabs(index) + 1)));
  auto grid = std::make_shared<const ModeGrid>(ModeGrid::make(model, n));
  EigenRecord r;
  r.k = k;
  r.grid = grid;
  r.u = exact_eigenvector(model, k, index, *grid);
  return observable_expectation(r, model, obs.b0, [](double) { return 1.0; });
}

struct ModeWeight {
  // nullptr: weight 1.
  const TestFunction* rho = nullptr;
};

double mode_sum(const SpectrumSource& src, int k, double lo, double hi, const Observable& obs,
                ModeWeight w) {
  CompensatedSum acc;
  src.visit(k, lo, hi, obs, [&](double E, double moment) {
    double term = moment;
    if (obs.beta) term *= obs.beta(E);
    if (w.rho) term *= (*w.rho)(E);
    acc.add(term);
  });
  return acc.value();
}

void require_coverage(const SpectrumSource& src, int k, double need) {
  if (src.coverage(k) < need) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "mode k=%d is complete only through E=%.10g, need %.10g", k,
                  src.coverage(k), need);
    throw InsufficientSpectrum(buf);
  }
}

double family_kernel(const SpectrumSource& src, const std::vector<Character>& chars,
                     const SpectralWindow& window, const Observable& obs, double theta) {
  window.check();
  const double h = src.h();
  const double H = window.width(h);
  const double need = window_coverage_need(window, h, theta);
  CompensatedSum total;
  for (const auto& chi : chars) {
    require_coverage(src, chi.k, need);
    const double s = mode_sum(src, chi.k, window.c, window.c + H, obs, {});
    total.add(s / (chi.d_chi * chi.isotropy_mult));
  }
  return kTwoPi * std::pow(h, 1.0 - window.delta) * total.value() /
         static_cast<double>(chars.size());
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Observable Observable::identity() {
  Observable o;
  o.name = "identity";
  o.b0 = [](double) { return 1.0; };
  o.beta = [](double) { return 1.0; };
  o.b0_constant = 1.0;
  o.sphere_moment = [](long long, int) { return 1.0; };
  return o;
}

Observable Observable::scaled(double alpha) const {
  Observable o = *this;
  o.name = name + "*" + fmt17(alpha);
  o.b0 = [f = b0, alpha](double s) { return alpha * f(s); };
  if (b0_constant) o.b0_constant = alpha * *b0_constant;
  if (sphere_moment)
    o.sphere_moment = [f = sphere_moment, alpha](long long l, int m) { return alpha * f(l, m); };
  return o;
}

TableSource::TableSource(const SpectrumTable& table, const RevolutionSurface& model)
    : table_(table), model_(model) {
  for (const auto& r : table_.records) by_mode_[r.k].push_back(&r);
}

double TableSource::coverage(int k) const {
  const auto it = table_.coverage.find(k);
  return it == table_.coverage.end() ? -std::numeric_limits<double>::infinity() : it->second;
}

void TableSource::visit(int k, double lo, double hi, const Observable& obs,
                        const Visitor& visit) const {
  const auto it = by_mode_.find(k);
  if (it == by_mode_.end()) return;
  for (const EigenRecord* r : it->second)
    if (r->E >= lo && r->E <= hi) visit(r->E, moment_from_vector(*r, model_, obs));
}

ExactSource::ExactSource(const RevolutionSurface& model, double h) : model_(model), h_(h) {
  if (model.exact_backend == ExactBackend::None)
    throw NoExactBackend(model.name + " has no closed-form spectrum");
  if (!(h > 0.0 && h <= 1.0)) throw ValidationError("h must lie in (0, 1]");
}

void ExactSource::visit(int k, double lo, double hi, const Observable& obs,
                        const Visitor& visit) const {
  const double h2 = h_ * h_;
  const long long ak = std::llabs(k);
  auto moment = [&](long long index) {
    if (obs.b0_constant) return *obs.b0_constant;
    if (model_.exact_backend == ExactBackend::Sphere && obs.sphere_moment)
      return obs.sphere_moment(index, static_cast<int>(ak));
    return sampled_exact_moment(model_, k, index, obs);
  };
  if (model_.exact_backend == ExactBackend::Sphere) {
    auto energy = [&](long long l) {
      return h2 * static_cast<double>(l) * static_cast<double>(l + 1);
    };
    const double x = std::max(0.0, lo / h2);
    long long l = static_cast<long long>(std::floor((-1.0 + std::sqrt(1.0 + 4.0 * x)) / 2.0));
    l = std::max(ak, l - 2);
    while (energy(l) < lo) ++l;
    for (; energy(l) <= hi; ++l) visit(energy(l), moment(l));
    return;
  }
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  auto energy = [&](long long m) {
    return h2 * (kk + static_cast<double>(m) * static_cast<double>(m));
  };
  long long m = static_cast<long long>(std::floor(std::sqrt(std::max(0.0, lo / h2 - kk))));
  m = std::max(0LL, m - 2);
  while (energy(m) < lo) ++m;
  for (; energy(m) <= hi; ++m) {
    visit(energy(m), moment(m));
    if (m != 0) visit(energy(m), moment(-m));
  }
}

double SpectralWindow::width(double h) const { return std::pow(h, delta); }

void SpectralWindow::check(int kappa) const {
  if (!(delta > 0.0)) throw ValidationError("window exponent delta must be positive");
  const double bound = 1.0 / (2.0 * kappa + 4.0);
  if (strict && !(delta < bound))
    throw ValidationError("delta = " + fmt17(delta) + " lies outside (0, " + fmt17(bound) +
                          ") required in strict mode");
}

bool family_within_theorem(double theta, double delta, int kappa) {
  return theta < (1.0 - (2.0 * kappa + 4.0) * delta) / (2.0 * kappa + 3.0);
}

double window_shoulder_exponent(const SpectralWindow& w, double theta, int kappa) {
  if (w.lambda > 0.0) return w.lambda;
  return (1.0 - (2.0 * kappa + 3.0) * theta) / (2.0 * kappa + 4.0) - w.delta;
}

double window_coverage_need(const SpectralWindow& w, double h, double theta, int kappa) {
  const double H = w.width(h);
  const double lambda = std::max(0.0, window_shoulder_exponent(w, theta, kappa));
  return w.c + H + 3.0 * std::pow(h, lambda) * H;
}

double weyl_lhs_single(const SpectrumSource& src, const Character& chi,
                       const SpectralWindow& window, const Observable& obs) {
  return family_kernel(src, {chi}, window, obs, 0.0);
}

double weyl_lhs_family(const SpectrumSource& src, const CharacterFamily& fam,
                       const SpectralWindow& window, const Observable& obs) {
  return family_kernel(src, family_at(fam, src.h()), window, obs, fam.theta());
}

double counting_lhs(const SpectrumTable& table, const CharacterFamily& fam,
                    const SpectralWindow& window) {
  window.check();
  if (table.records.empty()) return 0.0;
  const double h = table.h;
  const auto chars = family_at(fam, h);
  const double need = window_coverage_need(window, h, fam.theta());
  const double lo = window.c, hi = window.c + window.width(h);
  CompensatedSum total;
  for (const auto& chi : chars) {
    const auto cov = table.coverage.find(chi.k);
    if (cov == table.coverage.end() || cov->second < need)
      throw InsufficientSpectrum("mode k=" + std::to_string(chi.k) +
                                 " not covered through the window");
    CompensatedSum mode;
    std::size_t first = 0;
    for (const auto& cl : table.clusters) {
      const auto m = cl.mult.find(chi.k);
      const double mult = m == cl.mult.end() ? 0.0 : static_cast<double>(m->second);
      // Repeated index: one term per eigenfunction of the eigenspace.
      for (std::size_t q = first; q < first + cl.dim; ++q) {
        const double E = table.records[q].E;
        if (E >= lo && E <= hi) mode.add(mult / static_cast<double>(cl.dim));
      }
      first += cl.dim;
    }
    total.add(mode.value() / (chi.d_chi * chi.isotropy_mult));
  }
  return kTwoPi * std::pow(h, 1.0 - window.delta) * total.value() /
         static_cast<double>(chars.size());
}

double trace_lhs(const SpectrumSource& src, const CharacterFamily& fam, const TestFunction& rho,
                 const Observable& obs) {
  const double h = src.h();
  const auto chars = family_at(fam, h);
  const auto [lo, hi] = rho.support();
  CompensatedSum total;
  for (const auto& chi : chars) {
    require_coverage(src, chi.k, hi);
    const double s = mode_sum(src, chi.k, lo, hi, obs, {&rho});
    total.add(s / (chi.d_chi * chi.isotropy_mult));
  }
  return kTwoPi * h * total.value() / static_cast<double>(chars.size());
}

double predicted_exponent(const std::string& theorem, const FitParameters& p) {
  const double k = p.kappa;
  if (theorem == "trace") return 1.0 - (2.0 * k + 3.0) * (p.delta + p.theta);
  const double theta = (theorem == "weyl_single" || theorem == "counting_single") ? 0.0 : p.theta;
  return std::min(p.delta, (1.0 - (2.0 * k + 3.0) * theta) / (2.0 * k + 4.0) - p.delta);
}

WeylReport compare_and_fit(const std::vector<double>& h_list, const std::vector<double>& lhs,
                           const std::vector<double>& leading, const FitParameters& params,
                           std::string theorem, std::string model) {
  const std::size_t n = h_list.size();
  if (lhs.size() != n || leading.size() != n)
    throw ValidationError("fit inputs differ in length");
  if (n < 4) throw ValidationError("fit needs at least 4 values of h");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(h_list[i + 1] < h_list[i])) throw ValidationError("h values must strictly decrease");
  if (!(h_list.front() / h_list.back() >= 100.0 * (1.0 - 1e-12)))
    throw ValidationError("h values must span at least two decades");

  WeylReport rep;
  rep.theorem = std::move(theorem);
  rep.model = std::move(model);
  rep.params = params;
  rep.predicted_exponent = predicted_exponent(rep.theorem, params);
  bool exact_hit = false;
  for (std::size_t i = 0; i < n; ++i) {
    WeylRow r{h_list[i], lhs[i], leading[i], std::abs(lhs[i] - leading[i])};
    exact_hit |= !(r.abs_error > 0.0);
    rep.rows.push_back(r);
  }
  if (exact_hit) {
    rep.slope = rep.slope_logcorrected = std::numeric_limits<double>::infinity();
    rep.pass = true;
    return rep;
  }

  auto fit = [&](auto y_of, double* stderr_out) {
    double sx = 0, sy = 0;
    for (const auto& r : rep.rows) {
      sx += std::log(r.h);
      sy += y_of(r);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& r : rep.rows) {
      const double dx = std::log(r.h) - mx;
      sxx += dx * dx;
      sxy += dx * (y_of(r) - my);
    }
    const double slope = sxy / sxx;
    if (stderr_out) {
      double ssr = 0;
      for (const auto& r : rep.rows) {
        const double e = y_of(r) - (my + slope * (std::log(r.h) - mx));
        ssr += e * e;
      }
      *stderr_out = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    }
    return slope;
  };
  rep.slope = fit([](const WeylRow& r) { return std::log(r.abs_error); }, &rep.slope_stderr);
  const int extra = params.Lambda - 1;
  rep.slope_logcorrected = fit(
      [extra](const WeylRow& r) {
        const double y = std::log(r.abs_error);
        return extra > 0 ? y - extra * std::log(std::log(1.0 / r.h)) : y;
      },
      nullptr);
  rep.pass = rep.slope > 0.0;
  return rep;
}

void write_report_csv(std::ostream& os, const WeylReport& report,
                      const std::vector<std::string>& header) {
  for (const auto& line : header) os << "# " << line << '\n';
  os << "theorem,model,h,lhs,leading,abs_error\n";
  for (const auto& r : report.rows)
    os << report.theorem << ',' << report.model << ',' << fmt17(r.h) << ',' << fmt17(r.lhs)
       << ',' << fmt17(r.leading) << ',' << fmt17(r.abs_error) << '\n';
}

std::string report_summary_json(const WeylReport& report) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
    return x;
  };
  nlohmann::ordered_json j;
  j["theorem"] = report.theorem;
  j["model"] = report.model;
  j["slope"] = num(report.slope);
  j["slope_stderr"] = num(report.slope_stderr);
  j["slope_logcorrected"] = num(report.slope_logcorrected);
  j["predicted_exponent"] = num(report.predicted_exponent);
  j["pass"] = report.pass;
  j["theorem_mode"] = report.theorem_mode;
  j["delta"] = report.params.delta;
  j["theta"] = report.params.theta;
  j["kappa"] = report.params.kappa;
  j["Lambda"] = report.params.Lambda;
  return j.dump(2);
}

}  // namespace eqweyl
