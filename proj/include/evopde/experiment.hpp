#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evopde/ga.hpp"
#include "evopde/genome.hpp"
#include "evopde/jets.hpp"
#include "evopde/net.hpp"
#include "evopde/regression.hpp"
#include "evopde/solvers.hpp"

namespace evopde {

struct NetSpec {
  int hidden_layers = 4;
  int width = 30;
  Activation activation = Activation::kSin;
  // Multiplier on the input-layer weights at initialization; periodic
  // activations need it to reach the fine structure of the solution.
  double first_layer_scale = 1.0;

  std::vector<int> layer_sizes() const;
};

struct BaselineConfig {
  bool enabled = false;
  std::string library = "chaffee16";
  double ridge_lambda = -1.0;  // < 0: use 1e-5 * row count
  std::vector<double> thresholds;  // empty: built-in log grid
  int max_iters = 25;
  double penalty = 1e-4;  // sweep selection: mse + penalty * nnz
  bool penalty_relative = true;  // penalty scales with var(target)
};

struct TruthSpec {
  bool known = false;
  Genome genome;
  std::vector<double> coeffs;  // aligned with the canonical module order
};

/// Everything one pipeline run needs. Sub-stage seeds are derived from the
/// master seed, so one integer reproduces the whole run.
struct ExperimentConfig {
  std::string name = "custom";
  ProblemSpec problem = ProblemSpec::defaults(ProblemKind::kKdv);
  double noise_delta = 0.0;
  int sample_count = 10000;
  NetSpec net;
  TrainConfig train;
  MetaGridSpec meta;
  GaConfig ga;
  BaselineConfig baseline;
  TruthSpec truth;
  bool run_ga = true;
  std::string out_dir = "runs/out";
  std::string cache_dir;  // reuse solved fields / trained nets when set
  std::uint64_t seed = 42;

  void validate() const;
};

/// Named configurations: "<problem>-paper" mirrors the reference settings,
/// "<problem>-desk" is sized to run in well under ten minutes.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// JSON round trip. apply_config_json overlays only the fields present, so
/// a config file can start from a preset and override selectively.
std::string config_to_json(const ExperimentConfig& cfg);
void apply_config_json(ExperimentConfig& cfg, const std::string& json_text);

struct TrainSummary {
  int best_epoch = 0;
  double best_val = 0.0;
  int epochs_run = 0;
  double final_train = 0.0;
};

struct BaselineReport {
  bool ran = false;
  std::string library;
  std::vector<std::string> support;  // surviving term names
  std::vector<double> coeffs;        // full-length, zeros off support
  double mse = 0.0;
  double threshold = 0.0;
  bool support_match = false;
};

struct StageTimings {
  double solve_s = 0, train_s = 0, meta_s = 0, discover_s = 0, baseline_s = 0;
};

struct Report {
  std::string config_name;
  std::string problem;
  std::uint64_t seed = 0;
  std::string equation;  // rendered best equation
  std::string genome;    // bracket notation
  std::vector<double> coefficients;
  double best_fitness = 0.0;
  double best_mse = 0.0;
  int convergence_generation = 0;
  int generations = 0;
  bool structure_match = false;
  std::vector<double> coefficient_rel_errors;  // empty unless structure match
  std::string truth_genome;
  TrainSummary train;
  BaselineReport baseline;
  StageTimings timings;
  std::string error;  // non-empty when a sweep row failed

  std::string to_json() const;
  static Report from_json(const std::string& text);
  std::string to_text() const;
};

/// solve -> noise -> sample -> train -> meta-data -> discover/baseline.
/// Persists dataset, net, trace log and report under cfg.out_dir.
Report run_experiment(const ExperimentConfig& cfg);

enum class SweepAxis { kNoise, kDataVolume };
SweepAxis sweep_axis_from_string(const std::string& name);

/// Row configuration for one sweep value; seeds derive from
/// (master seed, value index).
ExperimentConfig sweep_row_config(const ExperimentConfig& base, SweepAxis axis,
                                  double value, std::size_t index);

/// One run per value; failures are recorded per row and the sweep
/// continues. Writes a combined comparison table under base.out_dir.
std::vector<Report> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                              const std::vector<double>& values);

// Cache-aware stage helpers, shared by the CLI subcommands.
Field obtain_dataset(const ExperimentConfig& cfg, StageTimings* timings = nullptr);
SurrogateNet obtain_net(const ExperimentConfig& cfg, const Field& observed,
                        StageTimings* timings = nullptr);

}  // namespace evopde
