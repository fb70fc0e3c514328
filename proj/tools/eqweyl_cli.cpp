// Command-line front end: model catalog, spectra, reduced volumes, experiment
// runs and re-fits of existing reports.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eqweyl/errors.hpp"
#include "eqweyl/experiment.hpp"
#include "eqweyl/io.hpp"
#include "eqweyl/peterweyl.hpp"
#include "eqweyl/reduction.hpp"

namespace {

using namespace eqweyl;

void print_nested(const std::exception& e, int depth = 0) {
  std::cerr << std::string(2 * depth, ' ') << "error: " << e.what() << '\n';
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_nested(inner, depth + 1);
  }
}

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw Error("cannot write " + out_path);
  f << text;
}

int cmd_models(bool json, const std::string& out) {
  if (json) {
    emit(out, model_catalog_json().dump(2) + "\n");
    return 0;
  }
  std::ostringstream os;
  os << "name,L,boundary,exact_backend,kappa,Lambda\n";
  for (const auto& name : builtin_names()) {
    const auto m = builtin_model(name);
    const auto p = action_profile(m);
    os << name << ',' << format_double(m.L) << ',' << to_string(m.boundary) << ','
       << to_string(m.exact_backend) << ',' << p.kappa << ',' << p.Lambda << '\n';
  }
  emit(out, os.str());
  return 0;
}

struct SpectrumArgs {
  std::string model;
  std::string potential = "zero";
  std::vector<int> ks{0};
  double h = 1.0;
  double emax = 25.0;
  std::string backend = "auto";
  std::size_t N = 4000;
  bool multiplicity = false;
};

int cmd_spectrum(const SpectrumArgs& a, const std::string& out) {
  const auto model = apply_potential(builtin_model(a.model), a.potential);
  validate(model);
  const bool exact = a.backend == "exact" ||
                     (a.backend == "auto" && model.exact_backend != ExactBackend::None);
  std::vector<EigenRecord> all;
  std::map<int, double> coverage;
  std::shared_ptr<const ModeGrid> grid;
  if (!exact) grid = std::make_shared<const ModeGrid>(ModeGrid::make(model, a.N));
  for (int k : a.ks) {
    std::vector<EigenRecord> recs;
    if (exact) {
      recs = exact_spectrum(model, k, a.h, a.emax);
    } else {
      const auto op = assemble_mode_operator(model, k, a.h, grid);
      if (op.grid_too_coarse)
        std::cerr << "warning: grid too coarse to resolve the k=" << k << " barrier\n";
      SolveOptions so;
      so.vectors = false;
      recs = solve_modes(op, a.emax, so);
    }
    coverage[k] = a.emax;
    all.insert(all.end(), recs.begin(), recs.end());
  }
  std::ostringstream os;
  if (a.multiplicity) {
    write_multiplicity_csv(os, multiplicity_table(all, exact ? 1e-9 : 1e-11, coverage));
  } else {
    os << "k,j,E,provenance\n";
    for (const auto& r : all)
      os << r.k << ',' << r.j << ',' << format_double(r.E) << ','
         << (r.provenance == Provenance::Exact ? "exact" : "fd") << '\n';
  }
  emit(out, os.str());
  return 0;
}

int cmd_reduce(const std::string& name, const std::string& potential,
               const std::vector<double>& cs, double eps, const std::string& out) {
  const auto model = apply_potential(builtin_model(name), potential);
  validate(model);
  std::vector<ReducedVolumeRow> rows;
  for (double c : cs) {
    const auto r = shell_integral(model, c, [](double, double) { return 1.0; });
    rows.push_back({c, r.value, "turning_point_quadrature", r.abserr});
    if (eps > 0.0) {
      const double t = thin_shell_measure(model, c, eps, [](double, double) { return 1.0; });
      rows.push_back({c, t, "thin_shell_eps=" + format_double(eps), std::abs(t - r.value)});
    }
  }
  std::ostringstream os;
  write_reduced_volume_csv(os, rows);
  emit(out, os.str());
  return 0;
}

struct RunArgs {
  std::string config;
  std::string out;
  int jobs = 0;
  bool strict = false, permissive = false;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a, bool trace) {
  std::ifstream in(a.config);
  if (!in) throw Error("cannot read config " + a.config);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg = parse_config(j);
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (a.jobs > 0) cfg.jobs = a.jobs;
  if (a.strict) cfg.strict = true;
  if (a.permissive) cfg.strict = false;
  if (a.seed) cfg.seed = *a.seed;
  if (trace != (cfg.theorem == "trace"))
    throw ValidationError(std::string("theorem: '") + cfg.theorem + "' does not belong to '" +
                          (trace ? "trace" : "weyl") + "'");
  const auto res = run_experiment(cfg);
  write_outputs(cfg, res);
  std::cout << res.summary_json;
  return res.report.pass ? 0 : 2;
}

// Reads a report CSV written by run, including its '# params' header line.
int cmd_fit(const std::string& path, std::optional<double> delta, std::optional<double> theta,
            std::optional<int> Lambda) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  FitParameters p;
  std::string line, theorem, model;
  std::vector<double> hs, lhs, leading;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# params", 0) == 0) {
      std::istringstream is(line.substr(8));
      for (std::string kv; is >> kv;) {
        const auto eq = kv.find('=');
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "delta") p.delta = std::stod(val);
        if (key == "theta") p.theta = std::stod(val);
        if (key == "kappa") p.kappa = std::stoi(val);
        if (key == "Lambda") p.Lambda = std::stoi(val);
      }
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream is(line);
    for (std::string cell; std::getline(is, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw ValidationError(path + ": expected 6 columns in '" + line + "'");
    theorem = f[0];
    model = f[1];
    hs.push_back(std::stod(f[2]));
    lhs.push_back(std::stod(f[3]));
    leading.push_back(std::stod(f[4]));
  }
  if (delta) p.delta = *delta;
  if (theta) p.theta = *theta;
  if (Lambda) p.Lambda = *Lambda;
  const auto rep = compare_and_fit(hs, lhs, leading, p, theorem, model);
  std::cout << report_summary_json(rep) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant Weyl law laboratory for circle-symmetric surfaces"};
  app.require_subcommand(1);
  std::string out;

  auto* models = app.add_subcommand("models", "List the built-in model catalog");
  bool models_json = false;
  models->add_flag("--json", models_json, "Full catalog as JSON (profile and potential samples)");
  models->add_option("--out", out, "Output file (default stdout)");

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues E <= emax for the given modes");
  SpectrumArgs sa;
  spectrum->set_help_flag("--help", "Print this help message and exit");
  spectrum->add_option("model", sa.model, "Model name")->required();
  spectrum->add_option("--k", sa.ks, "Mode index; repeat for several");
  spectrum->add_option("--h", sa.h, "Semiclassical parameter in (0, 1]");
  spectrum->add_option("--emax", sa.emax, "Energy cutoff");
  spectrum->add_option("--potential", sa.potential, "zero | half_one_minus_cos | cos2");
  spectrum->add_option("--backend", sa.backend, "auto | exact | fd")
      ->check(CLI::IsMember({"auto", "exact", "fd"}));
  spectrum->add_option("--N", sa.N, "Grid size for the fd backend");
  spectrum->add_flag("--multiplicity", sa.multiplicity, "Emit the (E, dim, k, mult) table");
  spectrum->add_option("--out", out, "Output file (default stdout)");

  auto* reduce = app.add_subcommand("reduce", "Reduced volumes over a list of energies");
  std::string rmodel, rpot = "zero";
  std::vector<double> cs{1.0};
  double eps = 0.0;
  reduce->add_option("model", rmodel, "Model name")->required();
  reduce->add_option("--c", cs, "Energy level; repeat for several");
  reduce->add_option("--potential", rpot, "zero | half_one_minus_cos | cos2");
  reduce->add_option("--eps", eps, "Also report the thin-shell oracle at this width");
  reduce->add_option("--out", out, "Output file (default stdout)");

  RunArgs ra;
  auto add_run = [&](CLI::App* sub) {
    sub->add_option("--config", ra.config, "Experiment config (JSON)")->required();
    sub->add_option("--out", ra.out, "Output directory");
    sub->add_option("--jobs", ra.jobs, "Worker threads");
    auto* s = sub->add_flag("--strict", ra.strict, "Enforce theorem parameter ranges");
    auto* p = sub->add_flag("--permissive", ra.permissive, "Allow exploratory parameters");
    s->excludes(p);
    sub->add_option("--seed", ra.seed, "Seed for the Monte Carlo cross-check");
  };
  auto* weyl = app.add_subcommand("weyl", "Run a Weyl-law sweep");
  add_run(weyl);
  auto* trace = app.add_subcommand("trace", "Run a trace-formula sweep");
  add_run(trace);

  auto* fit = app.add_subcommand("fit", "Re-fit an existing report CSV");
  std::string fit_path;
  std::optional<double> fdelta, ftheta;
  std::optional<int> fLambda;
  fit->add_option("csv", fit_path, "report.csv from weyl or trace")->required();
  fit->add_option("--delta", fdelta, "Override delta");
  fit->add_option("--theta", ftheta, "Override theta");
  fit->add_option("--Lambda", fLambda, "Override Lambda");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*models) return cmd_models(models_json, out);
    if (*spectrum) return cmd_spectrum(sa, out);
    if (*reduce) return cmd_reduce(rmodel, rpot, cs, eps, out);
    if (*weyl) return cmd_run(ra, false);
    if (*trace) return cmd_run(ra, true);
    if (*fit) return cmd_fit(fit_path, fdelta, ftheta, fLambda);
  } catch (const std::exception& e) {
    print_nested(e);
    return 1;
  }
  return 0;
}
