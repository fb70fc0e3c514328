#include "eqweyl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "eqweyl/errors.hpp"
#include "eqweyl/io.hpp"
#include "eqweyl/reduction.hpp"

namespace eqweyl {
namespace {

bool is_single(const std::string& theorem) {
  return theorem == "weyl_single" || theorem == "counting_single";
}
bool is_counting(const std::string& theorem) { return theorem.rfind("counting", 0) == 0; }

template <class T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Runs tasks[0..n) on `jobs` workers pulling indices from a shared counter.
// Exceptions are kept per task and the first one in task order is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::jthread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string context(double h, std::optional<int> k) {
  std::string s = "h=" + format_double(h);
  if (k) s += ", k=" + std::to_string(*k);
  return s;
}

CharacterFamily family_of(const ExperimentConfig& cfg) {
  return cfg.theta ? CharacterFamily::power_law(*cfg.theta) : CharacterFamily::fixed(cfg.ks);
}

ReducedSymbol leading_symbol(const RevolutionSurface& model, const Observable& obs) {
  return [&model, obs](double s, double sigma) {
    return obs.b0(s) * obs.beta(sigma * sigma + model.V(s));
  };
}

struct McEstimate {
  double mean = 0.0, stderr_ = 0.0;
};

// Monte Carlo cross-check of the leading term: s uniform on [0, L], sigma
// uniform on the slice of the energy band above s.
McEstimate monte_carlo_leading(const ExperimentConfig& cfg, const RevolutionSurface& model,
                               const ReducedSymbol& b, const TestFunction* rho) {
  if (cfg.mc_samples == 0) return {};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double eps = 1e-3;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < cfg.mc_samples; ++i) {
    const double s = model.L * unit(rng);
    const double v = model.V(s);
    double value = 0.0;
    if (rho) {
      const double top = rho->support().second - v;
      if (top > 0.0) {
        const double smax = std::sqrt(top);
        const double sigma = smax * (2.0 * unit(rng) - 1.0);
        value = model.L * 2.0 * smax * b(s, sigma) * (*rho)(sigma * sigma + v);
      }
    } else {
      const double hi2 = cfg.c + eps - v;
      if (hi2 > 0.0) {
        const double hi = std::sqrt(hi2), lo = std::sqrt(std::max(0.0, cfg.c - v));
        const double mag = lo + (hi - lo) * unit(rng);
        const double sigma = unit(rng) < 0.5 ? -mag : mag;
        value = model.L * 2.0 * (hi - lo) / eps * b(s, sigma);
      }
    }
    sum += value;
    sum2 += value * value;
  }
  const double n = static_cast<double>(cfg.mc_samples);
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n)};
}

}  // namespace

const std::vector<std::string>& b0_names() {
  static const std::vector<std::string> v{"one", "cos2", "sin2"};
  return v;
}

const std::vector<std::string>& beta_names() {
  static const std::vector<std::string> v{"one", "energy_bump"};
  return v;
}

const std::vector<std::string>& theorem_names() {
  static const std::vector<std::string> v{"weyl_single", "weyl_family", "counting_family",
                                          "counting_single", "trace"};
  return v;
}

double sphere_cos2_moment(long long l, int m) {
  const double L = static_cast<double>(l), M = static_cast<double>(m);
  return (2.0 * L * L + 2.0 * L - 2.0 * M * M - 1.0) / ((2.0 * L - 1.0) * (2.0 * L + 3.0));
}

Observable make_observable(const std::string& b0_id, const std::string& beta_id) {
  Observable o = Observable::identity();
  if (b0_id == "cos2") {
    o.b0 = [](double s) { return std::cos(s) * std::cos(s); };
    o.b0_constant.reset();
    o.sphere_moment = sphere_cos2_moment;
  } else if (b0_id == "sin2") {
    o.b0 = [](double s) { return std::sin(s) * std::sin(s); };
    o.b0_constant.reset();
    o.sphere_moment = [](long long l, int m) { return 1.0 - sphere_cos2_moment(l, m); };
  } else if (b0_id != "one") {
    throw ValidationError("unknown b0 '" + b0_id + "'");
  }
  if (beta_id == "energy_bump") {
    auto w = std::make_shared<const TestFunction>(bump(1.0, 1.0, 1.0));
    o.beta = [w](double E) { return (*w)(E); };
  } else if (beta_id != "one") {
    throw ValidationError("unknown beta '" + beta_id + "'");
  }
  o.name = b0_id + "*" + beta_id;
  return o;
}

std::vector<double> HSchedule::values() const {
  std::vector<double> out(count);
  if (count == 1) return {h_max};
  const double r = std::log(h_min / h_max) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = h_max * std::exp(r * i);
  out.front() = h_max;
  out.back() = h_min;
  return out;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  auto get = [&](const nlohmann::json& obj, const std::string& path, const char* key,
                 auto& dst) {
    if (!obj.contains(key)) return;
    try {
      obj.at(key).get_to(dst);
    } catch (const nlohmann::json::exception&) {
      errors.push_back(path + key + ": wrong type");
    }
  };
  static const std::vector<std::string> known{
      "model", "potential", "theorem", "c",       "delta",     "theta", "k",
      "h",     "observable", "rho",    "backend", "output",    "cache", "jobs",
      "seed",  "strict",     "monte_carlo_samples"};
  for (const auto& [key, _] : j.items())
    if (!contains(known, key)) errors.push_back(key + ": unknown field");

  get(j, "", "model", cfg.model);
  get(j, "", "potential", cfg.potential);
  get(j, "", "theorem", cfg.theorem);
  get(j, "", "c", cfg.c);
  get(j, "", "delta", cfg.delta);
  if (j.contains("theta") && !j["theta"].is_null()) {
    double t = 0;
    get(j, "", "theta", t);
    cfg.theta = t;
  }
  if (j.contains("k")) {
    if (j["k"].is_number_integer())
      cfg.ks = {j["k"].get<int>()};
    else
      get(j, "", "k", cfg.ks);
  }
  if (j.contains("h")) {
    const auto& h = j["h"];
    get(h, "h.", "max", cfg.h.h_max);
    get(h, "h.", "min", cfg.h.h_min);
    get(h, "h.", "count", cfg.h.count);
  }
  if (j.contains("observable")) {
    get(j["observable"], "observable.", "b0", cfg.b0);
    get(j["observable"], "observable.", "beta", cfg.beta);
  }
  if (j.contains("rho")) {
    get(j["rho"], "rho.", "center", cfg.rho_center);
    get(j["rho"], "rho.", "width", cfg.rho_width);
    get(j["rho"], "rho.", "height", cfg.rho_height);
  }
  if (j.contains("backend")) {
    const auto& b = j["backend"];
    if (b.is_string()) {
      cfg.backend = b.get<std::string>();
    } else {
      get(b, "backend.", "kind", cfg.backend);
      get(b, "backend.", "N", cfg.N);
    }
  }
  if (j.contains("output")) get(j["output"], "output.", "dir", cfg.out_dir);
  get(j, "", "cache", cfg.cache_path);
  get(j, "", "jobs", cfg.jobs);
  get(j, "", "seed", cfg.seed);
  get(j, "", "strict", cfg.strict);
  get(j, "", "monte_carlo_samples", cfg.mc_samples);

  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return cfg;
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  const bool model_ok = contains(builtin_names(), cfg.model);
  if (!model_ok) errors.push_back("model: unknown model '" + cfg.model + "'");
  if (!contains(potential_names(), cfg.potential))
    errors.push_back("potential: unknown potential '" + cfg.potential + "'");
  const bool theorem_ok = contains(theorem_names(), cfg.theorem);
  if (!theorem_ok) errors.push_back("theorem: unknown theorem '" + cfg.theorem + "'");
  if (!contains(b0_names(), cfg.b0)) errors.push_back("observable.b0: unknown id '" + cfg.b0 + "'");
  if (!contains(beta_names(), cfg.beta))
    errors.push_back("observable.beta: unknown id '" + cfg.beta + "'");

  const auto& h = cfg.h;
  if (!(h.h_max > 0.0 && h.h_max <= 1.0)) errors.push_back("h.max: must lie in (0, 1]");
  if (!(h.h_min > 0.0 && h.h_min < h.h_max)) errors.push_back("h.min: must lie in (0, h.max)");
  if (h.count < 4) errors.push_back("h.count: fits need at least 4 values");
  if (h.h_min > 0.0 && h.h_max / h.h_min < 100.0 * (1.0 - 1e-12))
    errors.push_back("h: schedule must span at least two decades");

  if (!std::isfinite(cfg.c)) errors.push_back("c: must be finite");
  if (cfg.theta && !(*cfg.theta >= 0.0)) errors.push_back("theta: must be nonnegative");
  if (!cfg.theta && cfg.ks.empty()) errors.push_back("k: need theta or a nonempty k list");
  if (theorem_ok && is_single(cfg.theorem)) {
    if (cfg.theta) errors.push_back("theta: single-character theorems take a fixed k");
    if (cfg.ks.size() != 1) errors.push_back("k: single-character theorems take exactly one k");
  }

  const double kappa = 1.0;
  if (theorem_ok && cfg.theorem != "trace") {
    if (!(cfg.delta > 0.0)) errors.push_back("delta: must be positive");
    const double bound = 1.0 / (2.0 * kappa + 4.0);
    if (cfg.strict && !(cfg.delta < bound))
      errors.push_back("delta: " + format_double(cfg.delta) + " outside (0, " +
                       format_double(bound) + ") required in strict mode");
    if (cfg.strict && cfg.theta && !family_within_theorem(*cfg.theta, cfg.delta))
      errors.push_back("theta: growth rate must stay below (1 - 6 delta)/5 in strict mode");
  }
  if (theorem_ok && cfg.theorem == "trace") {
    if (!(cfg.rho_width > 0.0)) errors.push_back("rho.width: must be positive");
    if (cfg.strict && cfg.theta && !(*cfg.theta < 1.0 / (2.0 * kappa + 3.0)))
      errors.push_back("theta: growth rate must stay below 1/5 in strict mode");
  }

  if (cfg.backend == "exact") {
    if (model_ok) {
      const auto m = builtin_model(cfg.model);
      if (m.exact_backend == ExactBackend::None)
        errors.push_back("backend: model '" + cfg.model + "' has no exact spectrum");
      if (cfg.potential != "zero")
        errors.push_back("backend: exact spectra require potential 'zero'");
    }
  } else if (cfg.backend == "fd") {
    if (cfg.N < 16) errors.push_back("backend.N: must be at least 16");
  } else {
    errors.push_back("backend.kind: expected 'exact' or 'fd'");
  }
  if (cfg.jobs < 1) errors.push_back("jobs: must be at least 1");
  return errors;
}

nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["model"] = cfg.model;
  j["potential"] = cfg.potential;
  j["theorem"] = cfg.theorem;
  j["c"] = cfg.c;
  j["delta"] = cfg.delta;
  if (cfg.theta)
    j["theta"] = *cfg.theta;
  else
    j["k"] = cfg.ks;
  j["h"] = {{"max", cfg.h.h_max}, {"min", cfg.h.h_min}, {"count", cfg.h.count}};
  j["observable"] = {{"b0", cfg.b0}, {"beta", cfg.beta}};
  if (cfg.theorem == "trace")
    j["rho"] = {{"center", cfg.rho_center}, {"width", cfg.rho_width}, {"height", cfg.rho_height}};
  j["backend"] = {{"kind", cfg.backend}, {"N", cfg.N}};
  j["seed"] = cfg.seed;
  j["strict"] = cfg.strict;
  j["monte_carlo_samples"] = cfg.mc_samples;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  return hex64(fnv1a64(config_json(cfg).dump()));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (auto errors = validate_config(cfg); !errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  const RevolutionSurface model = apply_potential(builtin_model(cfg.model), cfg.potential);
  validate(model);
  const ActionProfile action = action_profile(model);
  const Observable obs = make_observable(cfg.b0, cfg.beta);
  const CharacterFamily fam = family_of(cfg);
  const bool trace = cfg.theorem == "trace";
  SpectralWindow window;
  window.c = cfg.c;
  window.delta = cfg.delta;
  window.strict = cfg.strict;
  const TestFunction rho = bump(cfg.rho_center, cfg.rho_width, cfg.rho_height);
  const std::vector<double> hs = cfg.h.values();
  std::unique_ptr<SpectrumCache> cache;
  if (!cfg.cache_path.empty()) cache = std::make_unique<SpectrumCache>(cfg.cache_path);
  const std::string mhash = model_hash(model);

  // Spectrum tables for each h, needed by counting theorems and by the fd backend.
  auto e_max_at = [&](double h) {
    return trace ? rho.support().second : window_coverage_need(window, h, fam.theta());
  };
  const bool need_vectors = !obs.b0_constant.has_value();
  const bool tabulate = cfg.backend == "fd" || is_counting(cfg.theorem);
  std::vector<SpectrumTable> tables(hs.size());
  if (tabulate) {
    struct Task {
      std::size_t hi;
      int k;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < hs.size(); ++i)
      for (const auto& chi : family_at(fam, hs[i])) tasks.push_back({i, chi.k});
    std::vector<std::vector<EigenRecord>> slots(tasks.size());
    std::shared_ptr<const ModeGrid> grid;
    if (cfg.backend == "fd") grid = std::make_shared<const ModeGrid>(ModeGrid::make(model, cfg.N));
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t t) {
      const double h = hs[tasks[t].hi];
      const int k = tasks[t].k;
      try {
        const double E_max = e_max_at(h);
        const CacheKey key{mhash, h, k, cfg.backend == "fd" ? cfg.N : 0, E_max};
        if (cache) {
          if (auto hit = cache->lookup(key, grid); hit && (!need_vectors || cfg.backend != "fd" ||
                                                           hit->empty() || !hit->front().u.empty())) {
            slots[t] = std::move(*hit);
            return;
          }
        }
        if (cfg.backend == "fd") {
          const ModeOperator op = assemble_mode_operator(model, k, h, grid);
          SolveOptions so;
          so.vectors = need_vectors;
          slots[t] = solve_modes(op, E_max, so);
        } else {
          slots[t] = exact_spectrum(model, k, h, E_max);
        }
        if (cache) cache->store(key, slots[t]);
      } catch (...) {
        std::throw_with_nested(Error("spectrum failed at " + context(h, k)));
      }
    });
    for (std::size_t i = 0; i < hs.size(); ++i) {
      std::vector<EigenRecord> all;
      std::map<int, double> coverage;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (tasks[t].hi != i) continue;
        coverage[tasks[t].k] = e_max_at(hs[i]);
        for (auto& r : slots[t]) all.push_back(std::move(r));
      }
      const double eps = cfg.backend == "fd" ? 1e-11 : 1e-9;
      tables[i] = multiplicity_table(std::move(all), eps, coverage);
      tables[i].h = hs[i];
    }
  }

  std::vector<double> lhs(hs.size());
  parallel_for(hs.size(), cfg.jobs, [&](std::size_t i) {
    const double h = hs[i];
    try {
      if (is_counting(cfg.theorem)) {
        lhs[i] = counting_lhs(tables[i], fam, window);
        return;
      }
      std::unique_ptr<SpectrumSource> src;
      if (cfg.backend == "fd")
        src = std::make_unique<TableSource>(tables[i], model);
      else
        src = std::make_unique<ExactSource>(model, h);
      if (trace)
        lhs[i] = trace_lhs(*src, fam, rho, obs);
      else if (is_single(cfg.theorem))
        lhs[i] = weyl_lhs_single(*src, Character{cfg.ks.front()}, window, obs);
      else
        lhs[i] = weyl_lhs_family(*src, fam, window, obs);
    } catch (...) {
      std::throw_with_nested(Error("left-hand side failed at " + context(h, std::nullopt)));
    }
  });

  const ReducedSymbol symbol = leading_symbol(model, obs);
  double leading = 0.0;
  if (trace)
    leading = omega_weighted_integral(model, symbol, rho);
  else if (is_counting(cfg.theorem))
    leading = reduced_volume(model, cfg.c);
  else
    leading = sigma_c_integral(model, cfg.c, symbol);

  FitParameters params;
  params.delta = trace ? rho.scale_exponent() : cfg.delta;
  params.theta = cfg.theta.value_or(0.0);
  params.kappa = action.kappa;
  params.Lambda = action.Lambda;

  ExperimentResult res;
  res.report = compare_and_fit(hs, lhs, std::vector<double>(hs.size(), leading), params,
                               cfg.theorem, cfg.model);
  res.report.theorem_mode =
      trace ? params.theta < 1.0 / (2.0 * params.kappa + 3.0) - params.delta
            : cfg.delta < 1.0 / (2.0 * params.kappa + 4.0) &&
                  (!cfg.theta || family_within_theorem(params.theta, cfg.delta, params.kappa));
  const McEstimate mc = monte_carlo_leading(cfg, model, symbol, trace ? &rho : nullptr);
  res.mc_leading = mc.mean;
  res.mc_stderr = mc.stderr_;

  std::ostringstream csv;
  write_report_csv(csv, res.report,
                   {"eqweyl report", "config_hash=" + config_hash(cfg),
                    "params delta=" + format_double(params.delta) +
                        " theta=" + format_double(params.theta) +
                        " kappa=" + std::to_string(params.kappa) +
                        " Lambda=" + std::to_string(params.Lambda)});
  res.csv = csv.str();

  auto summary = nlohmann::ordered_json::parse(report_summary_json(res.report));
  summary["config_hash"] = config_hash(cfg);
  summary["leading"] = leading;
  summary["monte_carlo_leading"] = mc.mean;
  summary["monte_carlo_stderr"] = mc.stderr_;
  summary["config"] = config_json(cfg);
  res.summary_json = summary.dump(2) + "\n";

  std::ostringstream dat;
  dat << "# config_hash=" << config_hash(cfg) << "\n# h abs_error\n";
  for (const auto& r : res.report.rows)
    dat << format_double(r.h) << ' ' << format_double(r.abs_error) << '\n';
  res.error_table = dat.str();
  return res;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  fs::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  };
  put("report.csv", res.csv);
  put("summary.json", res.summary_json);
  put("errors.dat", res.error_table);
}

}  // namespace eqweyl
