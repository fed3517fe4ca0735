#include "evopde/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "evopde/errors.hpp"
#include "evopde/rng.hpp"

namespace evopde {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> NetSpec::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(2);
  for (int i = 0; i < hidden_layers; ++i) sizes.push_back(width);
  sizes.push_back(1);
  return sizes;
}

void ExperimentConfig::validate() const {
  problem.validate();
  if (noise_delta < 0) throw ConfigError("noise level must be >= 0");
  if (sample_count < 1) throw ConfigError("sample count must be positive");
  if (net.hidden_layers < 0 || net.width < 1)
    throw ConfigError("bad net architecture");
  train.validate();
  if (meta.nx <= 0 || meta.nt <= 0) throw ConfigError("meta grid must be non-empty");
  ga.validate();
  if (meta.x_order < ga.pool.max_spatial_order)
    throw ConfigError("meta x_order below the pool's max spatial order");
  if (meta.t_order < ga.pool.max_temporal_order)
    throw ConfigError("meta t_order below the pool's max temporal order");
}

namespace {

GenePool standard_pool() {
  GenePool pool;
  pool.lhs_options = {1, 2};
  pool.rhs_options = {0, 1, 2, 3};
  pool.max_spatial_order = 3;
  pool.max_temporal_order = 2;
  pool.max_initial_modules = 3;
  // Cubic reaction terms need three genes in one module; two is not
  // reachable by any mutation since none of them changes a module's arity.
  pool.max_genes_per_module = 3;
  return pool;
}

TruthSpec truth_for(ProblemKind kind, const ProblemSpec& spec) {
  TruthSpec t;
  t.known = true;
  switch (kind) {
    case ProblemKind::kKdv:
      t.genome = from_bracket("[1],{[0,1],[3]}");
      t.coeffs = {-1.0, spec.dispersion_sign * spec.b};
      break;
    case ProblemKind::kBurgers:
      t.genome = from_bracket("[1],{[0,1],[2]}");
      t.coeffs = {-1.0, spec.a};
      break;
    case ProblemKind::kWave:
      t.genome = from_bracket("[2],{[2]}");
      t.coeffs = {spec.wave_speed_sq};
      break;
    case ProblemKind::kChaffeeInfante:
      // u_t = u_xx + lambda*(u^3 - u); canonical order [0], [0,0,0], [2].
      t.genome = from_bracket("[1],{[0],[0,0,0],[2]}");
      t.coeffs = {-spec.lambda, spec.lambda, 1.0};
      break;
  }
  return t;
}

ExperimentConfig paper_preset(ProblemKind kind) {
  ExperimentConfig cfg;
  cfg.problem = ProblemSpec::defaults(kind);
  cfg.truth = truth_for(kind, cfg.problem);
  cfg.ga.pool = standard_pool();
  cfg.ga.population = 200;
  cfg.ga.max_generations = 100;
  cfg.train.max_epochs = 30000;
  cfg.train.patience = 500;
  cfg.train.batch_size = 256;
  switch (kind) {
    case ProblemKind::kKdv:
      cfg.name = "kdv-paper";
      cfg.sample_count = 30000;
      cfg.net = {5, 50, Activation::kSin, 20.0};
      cfg.meta = {-0.5, 0.001, 1000, 0.0, 0.005, 200, 4, 2};
      break;
    case ProblemKind::kBurgers:
      cfg.name = "burgers-paper";
      cfg.sample_count = 2000;
      cfg.net = {9, 20, Activation::kTanh, 1.0};
      cfg.meta = {-8.0, 0.05, 320, 0.0, 0.05, 180, 4, 2};
      break;
    case ProblemKind::kWave:
      cfg.name = "wave-paper";
      cfg.sample_count = 10000;
      cfg.net = {5, 50, Activation::kSin, 8.0};
      cfg.meta = {0.0, 2.0 / 400, 400, 0.0, 5.0 / 400, 400, 4, 2};
      break;
    case ProblemKind::kChaffeeInfante:
      cfg.name = "chaffee-paper";
      cfg.sample_count = 10000;
      cfg.net = {5, 50, Activation::kSin, 4.0};
      cfg.meta = {0.3, 1.7 / 400, 400, 0.2, 0.2 / 400, 400, 4, 2};
      break;
  }
  return cfg;
}

ExperimentConfig desk_preset(ProblemKind kind) {
  ExperimentConfig cfg = paper_preset(kind);
  cfg.ga.population = 100;
  cfg.ga.max_generations = 50;
  switch (kind) {
    case ProblemKind::kKdv:
      cfg.name = "kdv-desk";
      cfg.sample_count = 8000;
      cfg.net = {4, 32, Activation::kSin, 20.0};
      cfg.train.learning_rate = 2e-3;
      cfg.train.lr_decay = 0.9995;
      cfg.train.max_epochs = 4000;
      cfg.train.patience = 600;
      cfg.train.batch_size = 512;
      cfg.meta = {-0.45, 0.9 / 120, 120, 0.05, 0.9 / 50, 50, 4, 2};
      cfg.ga.max_generations = 60;
      break;
    case ProblemKind::kBurgers:
      cfg.name = "burgers-desk";
      cfg.sample_count = 4000;
      cfg.net = {6, 24, Activation::kTanh, 1.0};
      cfg.train.learning_rate = 2e-3;
      cfg.train.lr_decay = 0.9995;
      cfg.train.max_epochs = 4000;
      cfg.train.patience = 600;
      cfg.train.batch_size = 512;
      cfg.meta = {-7.5, 15.0 / 110, 110, 0.5, 8.3 / 45, 45, 4, 2};
      break;
    case ProblemKind::kWave:
      cfg.name = "wave-desk";
      cfg.sample_count = 6000;
      cfg.net = {4, 32, Activation::kSin, 6.0};
      cfg.train.learning_rate = 2e-3;
      cfg.train.lr_decay = 0.9995;
      cfg.train.max_epochs = 3000;
      cfg.train.patience = 500;
      cfg.train.batch_size = 512;
      cfg.meta = {0.1, 1.8 / 90, 90, 0.25, 4.5 / 45, 45, 4, 2};
      break;
    case ProblemKind::kChaffeeInfante:
      cfg.name = "chaffee-desk";
      cfg.sample_count = 6000;
      cfg.net = {4, 32, Activation::kSin, 4.0};
      cfg.train.learning_rate = 2e-3;
      cfg.train.lr_decay = 0.9995;
      cfg.train.max_epochs = 3000;
      cfg.train.patience = 500;
      cfg.train.batch_size = 512;
      cfg.meta = {0.35, 1.6 / 90, 90, 0.205, 0.19 / 40, 40, 4, 2};
      break;
  }
  return cfg;
}

}  // namespace

ExperimentConfig preset(const std::string& name) {
  for (ProblemKind kind : {ProblemKind::kKdv, ProblemKind::kBurgers,
                           ProblemKind::kWave, ProblemKind::kChaffeeInfante}) {
    std::string prefix = to_string(kind) == "chaffee_infante" ? "chaffee" : to_string(kind);
    if (name == prefix + "-paper") return paper_preset(kind);
    if (name == prefix + "-desk") return desk_preset(kind);
  }
  throw ConfigError("unknown preset '" + name + "'; available: " +
                    [] {
                      std::string all;
                      for (const auto& n : preset_names()) {
                        if (!all.empty()) all += ", ";
                        all += n;
                      }
                      return all;
                    }());
}

std::vector<std::string> preset_names() {
  return {"kdv-paper",  "kdv-desk",  "burgers-paper", "burgers-desk",
          "wave-paper", "wave-desk", "chaffee-paper", "chaffee-desk"};
}

// ---------------------------------------------------------------------------
// JSON (de)serialization

namespace {

json problem_to_json(const ProblemSpec& p) {
  return json{{"kind", to_string(p.kind)},
              {"b", p.b},
              {"a", p.a},
              {"wave_speed_sq", p.wave_speed_sq},
              {"lambda", p.lambda},
              {"dispersion_sign", p.dispersion_sign},
              {"modes", p.modes},
              {"x_min", p.x_min},
              {"x_max", p.x_max},
              {"inner_dt", p.inner_dt},
              {"record_dt", p.record_dt},
              {"t_end", p.t_end},
              {"space_nodes", p.space_nodes},
              {"time_nodes", p.time_nodes},
              {"x_f", p.x_f},
              {"t_f", p.t_f},
              {"record_every", p.record_every},
              {"record_start", p.record_start},
              {"seed", p.seed}};
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void problem_from_json(const json& j, ProblemSpec& p) {
  if (j.contains("kind")) {
    p = ProblemSpec::defaults(problem_kind_from_string(j.at("kind").get<std::string>()));
  }
  maybe(j, "b", p.b);
  maybe(j, "a", p.a);
  maybe(j, "wave_speed_sq", p.wave_speed_sq);
  maybe(j, "lambda", p.lambda);
  maybe(j, "dispersion_sign", p.dispersion_sign);
  maybe(j, "modes", p.modes);
  maybe(j, "x_min", p.x_min);
  maybe(j, "x_max", p.x_max);
  maybe(j, "inner_dt", p.inner_dt);
  maybe(j, "record_dt", p.record_dt);
  maybe(j, "t_end", p.t_end);
  maybe(j, "space_nodes", p.space_nodes);
  maybe(j, "time_nodes", p.time_nodes);
  maybe(j, "x_f", p.x_f);
  maybe(j, "t_f", p.t_f);
  maybe(j, "record_every", p.record_every);
  maybe(j, "record_start", p.record_start);
  maybe(j, "seed", p.seed);
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["problem"] = problem_to_json(cfg.problem);
  j["noise_delta"] = cfg.noise_delta;
  j["sample_count"] = cfg.sample_count;
  j["net"] = {{"hidden_layers", cfg.net.hidden_layers},
              {"width", cfg.net.width},
              {"activation", to_string(cfg.net.activation)},
              {"first_layer_scale", cfg.net.first_layer_scale}};
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"lr_decay", cfg.train.lr_decay},
                {"max_epochs", cfg.train.max_epochs},
                {"batch_size", cfg.train.batch_size},
                {"val_fraction", cfg.train.val_fraction},
                {"patience", cfg.train.patience}};
  j["meta"] = {{"x0", cfg.meta.x0}, {"dx", cfg.meta.dx}, {"nx", cfg.meta.nx},
               {"t0", cfg.meta.t0}, {"dt", cfg.meta.dt}, {"nt", cfg.meta.nt},
               {"x_order", cfg.meta.x_order}, {"t_order", cfg.meta.t_order}};
  j["ga"] = {{"population", cfg.ga.population},
             {"max_generations", cfg.ga.max_generations},
             {"crossover_rate", cfg.ga.crossover_rate},
             {"order_mutation_prob", cfg.ga.order_mutation_prob},
             {"add_module_prob", cfg.ga.add_module_prob},
             {"delete_module_prob", cfg.ga.delete_module_prob},
             {"epsilon", cfg.ga.epsilon},
             {"epsilon_relative", cfg.ga.epsilon_relative},
             {"elitism", cfg.ga.elitism},
             {"pool",
              {{"lhs_options", cfg.ga.pool.lhs_options},
               {"rhs_options", cfg.ga.pool.rhs_options},
               {"max_spatial_order", cfg.ga.pool.max_spatial_order},
               {"max_temporal_order", cfg.ga.pool.max_temporal_order},
               {"max_initial_modules", cfg.ga.pool.max_initial_modules},
               {"max_genes_per_module", cfg.ga.pool.max_genes_per_module}}}};
  j["baseline"] = {{"enabled", cfg.baseline.enabled},
                   {"library", cfg.baseline.library},
                   {"ridge_lambda", cfg.baseline.ridge_lambda},
                   {"thresholds", cfg.baseline.thresholds},
                   {"max_iters", cfg.baseline.max_iters},
                   {"penalty", cfg.baseline.penalty},
                   {"penalty_relative", cfg.baseline.penalty_relative}};
  if (cfg.truth.known)
    j["truth"] = {{"genome", to_bracket(cfg.truth.genome)},
                  {"coeffs", cfg.truth.coeffs}};
  j["run_ga"] = cfg.run_ga;
  j["out_dir"] = cfg.out_dir;
  j["cache_dir"] = cfg.cache_dir;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

void apply_config_json(ExperimentConfig& cfg, const std::string& json_text) {
  json j = json::parse(json_text);
  if (j.contains("preset")) cfg = preset(j.at("preset").get<std::string>());
  maybe(j, "name", cfg.name);
  if (j.contains("problem")) problem_from_json(j.at("problem"), cfg.problem);
  maybe(j, "noise_delta", cfg.noise_delta);
  maybe(j, "sample_count", cfg.sample_count);
  if (j.contains("net")) {
    const json& n = j.at("net");
    maybe(n, "hidden_layers", cfg.net.hidden_layers);
    maybe(n, "width", cfg.net.width);
    if (n.contains("activation"))
      cfg.net.activation = activation_from_string(n.at("activation").get<std::string>());
    maybe(n, "first_layer_scale", cfg.net.first_layer_scale);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    maybe(t, "learning_rate", cfg.train.learning_rate);
    maybe(t, "lr_decay", cfg.train.lr_decay);
    maybe(t, "max_epochs", cfg.train.max_epochs);
    maybe(t, "batch_size", cfg.train.batch_size);
    maybe(t, "val_fraction", cfg.train.val_fraction);
    maybe(t, "patience", cfg.train.patience);
  }
  if (j.contains("meta")) {
    const json& m = j.at("meta");
    maybe(m, "x0", cfg.meta.x0);
    maybe(m, "dx", cfg.meta.dx);
    maybe(m, "nx", cfg.meta.nx);
    maybe(m, "t0", cfg.meta.t0);
    maybe(m, "dt", cfg.meta.dt);
    maybe(m, "nt", cfg.meta.nt);
    maybe(m, "x_order", cfg.meta.x_order);
    maybe(m, "t_order", cfg.meta.t_order);
  }
  if (j.contains("ga")) {
    const json& g = j.at("ga");
    maybe(g, "population", cfg.ga.population);
    maybe(g, "max_generations", cfg.ga.max_generations);
    maybe(g, "crossover_rate", cfg.ga.crossover_rate);
    maybe(g, "order_mutation_prob", cfg.ga.order_mutation_prob);
    maybe(g, "add_module_prob", cfg.ga.add_module_prob);
    maybe(g, "delete_module_prob", cfg.ga.delete_module_prob);
    maybe(g, "epsilon", cfg.ga.epsilon);
    maybe(g, "epsilon_relative", cfg.ga.epsilon_relative);
    maybe(g, "elitism", cfg.ga.elitism);
    if (g.contains("pool")) {
      const json& p = g.at("pool");
      maybe(p, "lhs_options", cfg.ga.pool.lhs_options);
      maybe(p, "rhs_options", cfg.ga.pool.rhs_options);
      maybe(p, "max_spatial_order", cfg.ga.pool.max_spatial_order);
      maybe(p, "max_temporal_order", cfg.ga.pool.max_temporal_order);
      maybe(p, "max_initial_modules", cfg.ga.pool.max_initial_modules);
      maybe(p, "max_genes_per_module", cfg.ga.pool.max_genes_per_module);
    }
  }
  if (j.contains("baseline")) {
    const json& b = j.at("baseline");
    maybe(b, "enabled", cfg.baseline.enabled);
    maybe(b, "library", cfg.baseline.library);
    maybe(b, "ridge_lambda", cfg.baseline.ridge_lambda);
    maybe(b, "thresholds", cfg.baseline.thresholds);
    maybe(b, "max_iters", cfg.baseline.max_iters);
    maybe(b, "penalty", cfg.baseline.penalty);
    maybe(b, "penalty_relative", cfg.baseline.penalty_relative);
  }
  if (j.contains("truth")) {
    cfg.truth.known = true;
    cfg.truth.genome = from_bracket(j.at("truth").at("genome").get<std::string>());
    cfg.truth.coeffs = j.at("truth").at("coeffs").get<std::vector<double>>();
  }
  maybe(j, "run_ga", cfg.run_ga);
  maybe(j, "out_dir", cfg.out_dir);
  maybe(j, "cache_dir", cfg.cache_dir);
  maybe(j, "seed", cfg.seed);
}

// ---------------------------------------------------------------------------
// Report (de)serialization

std::string Report::to_json() const {
  json j;
  j["config_name"] = config_name;
  j["problem"] = problem;
  j["seed"] = seed;
  j["equation"] = equation;
  j["genome"] = genome;
  j["coefficients"] = coefficients;
  j["best_fitness"] = best_fitness;
  j["best_mse"] = best_mse;
  j["convergence_generation"] = convergence_generation;
  j["generations"] = generations;
  j["structure_match"] = structure_match;
  j["coefficient_rel_errors"] = coefficient_rel_errors;
  j["truth_genome"] = truth_genome;
  j["train"] = {{"best_epoch", train.best_epoch},
                {"best_val", train.best_val},
                {"epochs_run", train.epochs_run},
                {"final_train", train.final_train}};
  j["baseline"] = {{"ran", baseline.ran},
                   {"library", baseline.library},
                   {"support", baseline.support},
                   {"coefficients", baseline.coeffs},
                   {"mse", baseline.mse},
                   {"threshold", baseline.threshold},
                   {"support_match", baseline.support_match}};
  j["timings"] = {{"solve_s", timings.solve_s},
                  {"train_s", timings.train_s},
                  {"meta_s", timings.meta_s},
                  {"discover_s", timings.discover_s},
                  {"baseline_s", timings.baseline_s}};
  j["error"] = error;
  return j.dump(2);
}

Report Report::from_json(const std::string& text) {
  json j = json::parse(text);
  Report r;
  maybe(j, "config_name", r.config_name);
  maybe(j, "problem", r.problem);
  maybe(j, "seed", r.seed);
  maybe(j, "equation", r.equation);
  maybe(j, "genome", r.genome);
  maybe(j, "coefficients", r.coefficients);
  maybe(j, "best_fitness", r.best_fitness);
  maybe(j, "best_mse", r.best_mse);
  maybe(j, "convergence_generation", r.convergence_generation);
  maybe(j, "generations", r.generations);
  maybe(j, "structure_match", r.structure_match);
  maybe(j, "coefficient_rel_errors", r.coefficient_rel_errors);
  maybe(j, "truth_genome", r.truth_genome);
  if (j.contains("train")) {
    const json& t = j.at("train");
    maybe(t, "best_epoch", r.train.best_epoch);
    maybe(t, "best_val", r.train.best_val);
    maybe(t, "epochs_run", r.train.epochs_run);
    maybe(t, "final_train", r.train.final_train);
  }
  if (j.contains("baseline")) {
    const json& b = j.at("baseline");
    maybe(b, "ran", r.baseline.ran);
    maybe(b, "library", r.baseline.library);
    maybe(b, "support", r.baseline.support);
    maybe(b, "coefficients", r.baseline.coeffs);
    maybe(b, "mse", r.baseline.mse);
    maybe(b, "threshold", r.baseline.threshold);
    maybe(b, "support_match", r.baseline.support_match);
  }
  if (j.contains("timings")) {
    const json& t = j.at("timings");
    maybe(t, "solve_s", r.timings.solve_s);
    maybe(t, "train_s", r.timings.train_s);
    maybe(t, "meta_s", r.timings.meta_s);
    maybe(t, "discover_s", r.timings.discover_s);
    maybe(t, "baseline_s", r.timings.baseline_s);
  }
  maybe(j, "error", r.error);
  return r;
}

std::string Report::to_text() const {
  std::ostringstream os;
  os << "run:         " << config_name << " (problem " << problem << ", seed "
     << seed << ")\n";
  if (!error.empty()) {
    os << "error:       " << error << '\n';
    return os.str();
  }
  if (!equation.empty()) {
    os << "discovered:  " << equation << '\n';
    os << "genome:      " << genome << '\n';
    os << "fitness:     " << best_fitness << " (mse " << best_mse
       << ", converged at generation " << convergence_generation << "/"
       << generations << ")\n";
    if (!truth_genome.empty()) {
      os << "truth:       " << truth_genome
         << (structure_match ? "  [structure match]" : "  [structure MISMATCH]")
         << '\n';
      if (!coefficient_rel_errors.empty()) {
        os << "coeff errs:  ";
        for (std::size_t i = 0; i < coefficient_rel_errors.size(); ++i) {
          if (i) os << ", ";
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * coefficient_rel_errors[i]);
          os << buf;
        }
        os << '\n';
      }
    }
  }
  if (baseline.ran) {
    os << "baseline:    " << baseline.library << " support {";
    for (std::size_t i = 0; i < baseline.support.size(); ++i) {
      if (i) os << ", ";
      os << baseline.support[i];
    }
    os << "}" << (baseline.support_match ? "  [support match]" : "  [support MISMATCH]")
       << '\n';
  }
  os << "training:    best val " << train.best_val << " at epoch "
     << train.best_epoch << " (" << train.epochs_run << " epochs)\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "timings:     solve %.1fs train %.1fs meta %.1fs discover %.1fs "
                "baseline %.1fs\n",
                timings.solve_s, timings.train_s, timings.meta_s,
                timings.discover_s, timings.baseline_s);
  os << buf;
  return os.str();
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string hash_hex(const std::string& text) {
  std::uint64_t h = fnv1a(text);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string problem_hash(const ProblemSpec& p) {
  return hash_hex(problem_to_json(p).dump());
}

std::string net_stage_hash(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = problem_to_json(cfg.problem);
  j["noise_delta"] = cfg.noise_delta;
  j["sample_count"] = cfg.sample_count;
  j["net"] = {{"hidden_layers", cfg.net.hidden_layers},
              {"width", cfg.net.width},
              {"activation", to_string(cfg.net.activation)},
              {"first_layer_scale", cfg.net.first_layer_scale}};
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"lr_decay", cfg.train.lr_decay},
                {"max_epochs", cfg.train.max_epochs},
                {"batch_size", cfg.train.batch_size},
                {"val_fraction", cfg.train.val_fraction},
                {"patience", cfg.train.patience}};
  j["seed"] = cfg.seed;
  return hash_hex(j.dump());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << text;
}

}  // namespace

Field obtain_dataset(const ExperimentConfig& cfg, StageTimings* timings) {
  const auto start = Clock::now();
  Field field;
  bool from_cache = false;
  fs::path cache_file;
  if (!cfg.cache_dir.empty()) {
    fs::create_directories(cfg.cache_dir);
    cache_file = fs::path(cfg.cache_dir) / ("field_" + problem_hash(cfg.problem) + ".bin");
    if (fs::exists(cache_file)) {
      field = load_field(cache_file.string());
      from_cache = true;
    }
  }
  if (!from_cache) {
    field = solve_reference_problem(cfg.problem);
    if (!cache_file.empty()) save_field(field, cfg.problem, cache_file.string());
  }
  if (timings) timings->solve_s += seconds_since(start);
  return field;
}

SurrogateNet obtain_net(const ExperimentConfig& cfg, const Field& observed,
                        StageTimings* timings) {
  const auto start = Clock::now();
  fs::path cache_file;
  if (!cfg.cache_dir.empty()) {
    fs::create_directories(cfg.cache_dir);
    cache_file = fs::path(cfg.cache_dir) / ("net_" + net_stage_hash(cfg) + ".json");
    if (fs::exists(cache_file)) {
      SurrogateNet net = SurrogateNet::load(cache_file.string());
      if (timings) timings->train_s += seconds_since(start);
      return net;
    }
  }
  auto samples = sample_training_data(observed, static_cast<std::size_t>(cfg.sample_count),
                                      derive_seed(cfg.seed, "sample"));
  SurrogateNet net = SurrogateNet::init_random(cfg.net.layer_sizes(), cfg.net.activation,
                                               derive_seed(cfg.seed, "init"),
                                               cfg.net.first_layer_scale);
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "train");
  train(net, samples, tc);
  if (!cache_file.empty()) net.save(cache_file.string());
  if (timings) timings->train_s += seconds_since(start);
  return net;
}

namespace {

// Maps a truth module (a product of u-powers and at most one derivative
// factor) onto a fixed-library term. Returns -1 when not representable.
int library_index_of(const TermModule& m, const FixedLibrary& lib) {
  LibraryTerm term;
  for (int gene : m.genes) {
    if (gene == 0) {
      ++term.u_power;
    } else if (term.deriv_order == 0) {
      term.deriv_order = gene;
    } else {
      return -1;
    }
  }
  for (std::size_t i = 0; i < lib.terms.size(); ++i)
    if (lib.terms[i] == term) return static_cast<int>(i);
  return -1;
}

BaselineReport run_baseline(const ExperimentConfig& cfg, const MetaDataset& meta) {
  BaselineReport rep;
  rep.ran = true;
  rep.library = cfg.baseline.library;
  FixedLibrary lib = FixedLibrary::by_name(cfg.baseline.library, meta);
  Eigen::VectorXd target = meta.target_column(1);

  double lambda = cfg.baseline.ridge_lambda;
  if (lambda < 0) lambda = 1e-5 * static_cast<double>(meta.rows());
  std::vector<double> thresholds = cfg.baseline.thresholds;
  if (thresholds.empty())
    thresholds = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0};
  double penalty = cfg.baseline.penalty;
  if (cfg.baseline.penalty_relative) {
    const double mean = target.mean();
    const double var = (target.array() - mean).square().mean();
    penalty *= var > 0 ? var : 1.0;
  }

  StridgeResult res = stridge_sweep(lib, target, lambda, thresholds,
                                    cfg.baseline.max_iters, penalty);
  rep.mse = res.fit.mse;
  rep.threshold = res.threshold;
  rep.coeffs.assign(res.fit.coeffs.data(),
                    res.fit.coeffs.data() + res.fit.coeffs.size());
  for (int idx : res.support)
    rep.support.push_back(lib.terms[static_cast<std::size_t>(idx)].name());

  if (cfg.truth.known && cfg.truth.genome.lhs == 1) {
    std::vector<int> truth_idx;
    bool representable = true;
    for (const auto& m : cfg.truth.genome.modules) {
      const int idx = library_index_of(m, lib);
      if (idx < 0) {
        representable = false;
        break;
      }
      truth_idx.push_back(idx);
    }
    std::sort(truth_idx.begin(), truth_idx.end());
    rep.support_match = representable && truth_idx == res.support;
  }
  return rep;
}

std::string trace_to_log(const DiscoveryResult& result) {
  std::ostringstream os;
  for (const auto& gb : result.trace) {
    os << "gen=" << gb.generation << " genome=" << to_bracket(gb.genome)
       << " fitness=" << gb.fitness << " mse=" << gb.mse << " coeffs=";
    for (std::size_t i = 0; i < gb.coeffs.size(); ++i) {
      if (i) os << ',';
      os << gb.coeffs[i];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);

  Report report;
  report.config_name = cfg.name;
  report.problem = to_string(cfg.problem.kind);
  report.seed = cfg.seed;
  if (cfg.truth.known) report.truth_genome = to_bracket(canonicalize(cfg.truth.genome));

  write_text((out / "config.json").string(), config_to_json(cfg));

  // Stage 1: dataset.
  Field field = obtain_dataset(cfg, &report.timings);
  save_field(field, cfg.problem, (out / "dataset.bin").string());

  // Stage 2: noise.
  if (cfg.noise_delta > 0) {
    field = add_noise(field, cfg.noise_delta, derive_seed(cfg.seed, "noise"));
    save_field(field, cfg.problem, (out / "dataset_noisy.bin").string());
  }

  // Stage 3 + 4: sample and train (or reuse a cached net).
  SurrogateNet net;
  {
    auto samples_start = Clock::now();
    bool cached = false;
    if (!cfg.cache_dir.empty()) {
      const fs::path cache_file =
          fs::path(cfg.cache_dir) / ("net_" + net_stage_hash(cfg) + ".json");
      if (fs::exists(cache_file)) {
        net = SurrogateNet::load(cache_file.string());
        cached = true;
        report.timings.train_s += seconds_since(samples_start);
      }
    }
    if (!cached) {
      auto samples = sample_training_data(field, static_cast<std::size_t>(cfg.sample_count),
                                          derive_seed(cfg.seed, "sample"));
      net = SurrogateNet::init_random(cfg.net.layer_sizes(), cfg.net.activation,
                                      derive_seed(cfg.seed, "init"),
                                      cfg.net.first_layer_scale);
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.seed, "train");
      TrainResult tr = train(net, samples, tc);
      report.train.best_epoch = tr.best_epoch;
      report.train.best_val = tr.best_val;
      report.train.epochs_run = static_cast<int>(tr.train_loss.size());
      report.train.final_train = tr.train_loss.empty() ? 0.0 : tr.train_loss.back();
      if (!cfg.cache_dir.empty()) {
        fs::create_directories(cfg.cache_dir);
        net.save((fs::path(cfg.cache_dir) / ("net_" + net_stage_hash(cfg) + ".json")).string());
      }
      report.timings.train_s += seconds_since(samples_start);
    }
  }
  net.save((out / "net.json").string());

  // Stage 5: meta-data.
  {
    const auto start = Clock::now();
    MetaDataset meta = generate_meta_data(net, cfg.meta);
    report.timings.meta_s += seconds_since(start);

    // Stage 6: discovery.
    if (cfg.run_ga) {
      const auto ga_start = Clock::now();
      GaConfig gc = cfg.ga;
      gc.seed = derive_seed(cfg.seed, "ga");
      DiscoveryResult result = evolve(meta, gc);
      report.timings.discover_s += seconds_since(ga_start);

      write_text((out / "trace.log").string(), trace_to_log(result));
      report.genome = to_bracket(result.best.genome);
      report.coefficients.assign(
          result.best.fit.coeffs.data(),
          result.best.fit.coeffs.data() + result.best.fit.coeffs.size());
      report.equation = render(result.best.genome, report.coefficients);
      report.best_fitness = result.best.fitness;
      report.best_mse = result.best.fit.mse;
      report.convergence_generation = result.convergence_generation;
      report.generations = static_cast<int>(result.trace.size()) - 1;

      if (cfg.truth.known) {
        const Genome truth = canonicalize(cfg.truth.genome);
        report.structure_match = truth == result.best.genome;
        if (report.structure_match &&
            cfg.truth.coeffs.size() == report.coefficients.size()) {
          for (std::size_t i = 0; i < cfg.truth.coeffs.size(); ++i) {
            const double denom = std::abs(cfg.truth.coeffs[i]);
            report.coefficient_rel_errors.push_back(
                denom > 0 ? std::abs(report.coefficients[i] - cfg.truth.coeffs[i]) / denom
                          : std::abs(report.coefficients[i]));
          }
        }
      }
    }

    // Stage 7: sparse-regression baseline.
    if (cfg.baseline.enabled) {
      const auto b_start = Clock::now();
      report.baseline = run_baseline(cfg, meta);
      report.timings.baseline_s += seconds_since(b_start);
    }
  }

  write_text((out / "report.json").string(), report.to_json());
  write_text((out / "report.txt").string(), report.to_text());
  return report;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "noise") return SweepAxis::kNoise;
  if (name == "data_volume" || name == "data") return SweepAxis::kDataVolume;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

ExperimentConfig sweep_row_config(const ExperimentConfig& base, SweepAxis axis,
                                  double value, std::size_t index) {
  ExperimentConfig cfg = base;
  cfg.seed = derive_seed(base.seed, "sweep", index);
  char tag[64];
  if (axis == SweepAxis::kNoise) {
    cfg.noise_delta = value;
    std::snprintf(tag, sizeof(tag), "noise_%g", value);
  } else {
    cfg.sample_count = static_cast<int>(value);
    std::snprintf(tag, sizeof(tag), "data_%d", cfg.sample_count);
  }
  cfg.out_dir = (fs::path(base.out_dir) / tag).string();
  return cfg;
}

std::vector<Report> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                              const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<Report> reports;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const ExperimentConfig cfg = sweep_row_config(base, axis, values[i], i);
    try {
      reports.push_back(run_experiment(cfg));
    } catch (const std::exception& e) {
      Report failed;
      failed.config_name = cfg.name;
      failed.problem = to_string(cfg.problem.kind);
      failed.seed = cfg.seed;
      failed.error = e.what();
      reports.push_back(std::move(failed));
    }
  }

  // Combined comparison table.
  std::ostringstream table;
  table << (axis == SweepAxis::kNoise ? "noise" : "samples")
        << "\tdiscovered\tstructure_match\n";
  json rows = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Report& r = reports[i];
    table << values[i] << '\t'
          << (r.error.empty() ? r.equation : "error: " + r.error) << '\t'
          << (r.error.empty() ? (r.structure_match ? "yes" : "no") : "-") << '\n';
    rows.push_back(json::parse(r.to_json()));
  }
  fs::create_directories(base.out_dir);
  write_text((fs::path(base.out_dir) / "sweep.txt").string(), table.str());
  write_text((fs::path(base.out_dir) / "sweep.json").string(), rows.dump(2));
  return reports;
}

}  // namespace evopde
