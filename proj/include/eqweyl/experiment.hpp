#pragma once

// Batch experiments: a JSON config describing an h-sweep of one theorem on one
// model, executed over a thread pool with an ordered merge so outputs do not
// depend on the number of workers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqweyl/weyllab.hpp"

namespace eqweyl {

/// Named observables: b0 in {one, cos2, sin2}, beta in {one, energy_bump}.
Observable make_observable(const std::string& b0_id, const std::string& beta_id);
const std::vector<std::string>& b0_names();
const std::vector<std::string>& beta_names();

/// Closed-form <cos^2 theta Y_lm, Y_lm> on the round sphere.
double sphere_cos2_moment(long long l, int m);

struct HSchedule {
  double h_max = 1e-2;
  double h_min = 1e-4;
  int count = 7;

  /// Geometric sequence from h_max down to h_min.
  std::vector<double> values() const;
};

struct ExperimentConfig {
  std::string model = "sphere";
  std::string potential = "zero";
  std::string theorem = "counting_single";
  double c = 1.0;
  double delta = 0.16;
  std::optional<double> theta;   // PowerLaw family when set
  std::vector<int> ks{0};        // Fixed family otherwise
  HSchedule h;
  std::string b0 = "one";
  std::string beta = "one";
  double rho_center = 1.0, rho_width = 0.5, rho_height = 1.0;  // trace only
  std::string backend = "exact";  // exact | fd
  std::size_t N = 4000;
  std::string out_dir;
  std::string cache_path;
  int jobs = 1;
  std::uint64_t seed = 1;
  bool strict = true;
  std::size_t mc_samples = 100000;
};

const std::vector<std::string>& theorem_names();

/// Throws ValidationError listing every failing field by its JSON path.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::ordered_json config_json(const ExperimentConfig& cfg);

/// Every check a config must pass before it runs; messages carry field paths.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

/// Hash of the fields that determine results (not jobs, paths or cache).
std::string config_hash(const ExperimentConfig& cfg);

struct ExperimentResult {
  WeylReport report;
  double mc_leading = 0.0;   // Monte Carlo estimate of the leading term
  double mc_stderr = 0.0;
  std::string csv;           // WeylReport CSV with provenance header
  std::string summary_json;
  std::string error_table;   // "h abs_error" lines for gnuplot
};

/// Runs the sweep. Backend failures are rethrown with (h, k) context.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes report.csv, summary.json and errors.dat under cfg.out_dir.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res);

}  // namespace eqweyl
