#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "evopde/errors.hpp"
#include "evopde/experiment.hpp"

namespace fs = std::filesystem;
using namespace evopde;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset_name;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file (overlays the preset)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--preset", opts.preset_name, "named preset, e.g. kdv-desk");
  cmd->add_option("--seed", opts.seed, "master seed")->each([&opts](const std::string&) {
    opts.seed_set = true;
  });
  cmd->add_option("--out", opts.out_dir, "output directory");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
  ExperimentConfig cfg;
  bool have_base = false;
  if (!opts.preset_name.empty()) {
    cfg = preset(opts.preset_name);
    have_base = true;
  }
  if (!opts.config_path.empty()) {
    std::ifstream is(opts.config_path);
    std::stringstream buf;
    buf << is.rdbuf();
    apply_config_json(cfg, buf.str());
    have_base = true;
  }
  if (!have_base) {
    std::string names;
    for (const auto& n : preset_names()) {
      if (!names.empty()) names += ", ";
      names += n;
    }
    throw CLI::ValidationError("--preset or --config required. Presets: " + names);
  }
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDE discovery: reference solvers, neural surrogates, "
               "genetic search and a sparse-regression baseline"};
  app.require_subcommand(1);

  CommonOpts solve_opts, train_opts, discover_opts, baseline_opts, sweep_opts;

  auto* solve_cmd = app.add_subcommand("solve", "generate a reference dataset");
  add_common(solve_cmd, solve_opts);

  auto* train_cmd = app.add_subcommand("train", "solve, sample and train the surrogate");
  add_common(train_cmd, train_opts);

  auto* discover_cmd =
      app.add_subcommand("discover", "full pipeline through the genetic search");
  add_common(discover_cmd, discover_opts);

  auto* baseline_cmd =
      app.add_subcommand("baseline", "full pipeline with the sparse-regression baseline");
  add_common(baseline_cmd, baseline_opts);

  auto* sweep_cmd = app.add_subcommand("sweep", "run one experiment per axis value");
  add_common(sweep_cmd, sweep_opts);
  std::string axis = "noise";
  std::vector<double> values;
  sweep_cmd->add_option("--axis", axis, "noise or data_volume");
  sweep_cmd->add_option("--values", values, "axis values (comma separated)")
      ->delimiter(',')
      ->required();

  auto* report_cmd = app.add_subcommand("report", "pretty-print a report.json");
  std::string report_path;
  report_cmd->add_option("--in", report_path, "report.json path or run directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      ExperimentConfig cfg = resolve_config(solve_opts);
      cfg.validate();
      fs::create_directories(cfg.out_dir);
      Field field = obtain_dataset(cfg);
      const auto base = fs::path(cfg.out_dir);
      save_field(field, cfg.problem, (base / "dataset.bin").string());
      export_field_csv(field, (base / "dataset.csv").string());
      std::printf("solved %s: %zu x %zu points -> %s\n",
                  to_string(cfg.problem.kind).c_str(), field.x_nodes.size(),
                  field.t_nodes.size(), (base / "dataset.bin").string().c_str());
    } else if (train_cmd->parsed()) {
      ExperimentConfig cfg = resolve_config(train_opts);
      cfg.validate();
      fs::create_directories(cfg.out_dir);
      Field field = obtain_dataset(cfg);
      if (cfg.noise_delta > 0)
        field = add_noise(field, cfg.noise_delta, derive_seed(cfg.seed, "noise"));
      SurrogateNet net = obtain_net(cfg, field);
      const std::string path = (fs::path(cfg.out_dir) / "net.json").string();
      net.save(path);
      std::printf("trained %s surrogate -> %s\n", to_string(cfg.problem.kind).c_str(),
                  path.c_str());
    } else if (discover_cmd->parsed()) {
      ExperimentConfig cfg = resolve_config(discover_opts);
      Report report = run_experiment(cfg);
      std::cout << report.to_text();
    } else if (baseline_cmd->parsed()) {
      ExperimentConfig cfg = resolve_config(baseline_opts);
      cfg.run_ga = false;
      cfg.baseline.enabled = true;
      Report report = run_experiment(cfg);
      std::cout << report.to_text();
    } else if (sweep_cmd->parsed()) {
      ExperimentConfig cfg = resolve_config(sweep_opts);
      auto reports = run_sweep(cfg, sweep_axis_from_string(axis), values);
      for (const auto& r : reports) std::cout << r.to_text() << '\n';
      std::printf("sweep table -> %s\n",
                  (fs::path(cfg.out_dir) / "sweep.txt").string().c_str());
    } else if (report_cmd->parsed()) {
      fs::path path(report_path);
      if (fs::is_directory(path)) path /= "report.json";
      std::ifstream is(path);
      if (!is) throw evopde::Error("cannot open '" + path.string() + "'");
      std::stringstream buf;
      buf << is.rdbuf();
      Report report = Report::from_json(buf.str());
      std::cout << report.to_text();
      if (!report.equation.empty()) {
        // Round-trip the rendered equation through the parser as a check.
        auto [genome, coeffs] = parse_equation(report.equation);
        std::cout << "parsed genome: " << to_bracket(genome) << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
