#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include "evopde/experiment.hpp"
#include "evopde/errors.hpp"
using namespace evopde;
using Clock = std::chrono::steady_clock;
static double secs(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// PDE residual of the jets: how well the meta derivatives satisfy the
// problem's true equation. The key jet-quality diagnostic.
static double residual_ratio(const ExperimentConfig& cfg, const MetaDataset& ds) {
  double sr = 0, st = 0;
  for (Eigen::Index r = 0; r < ds.rows(); ++r) {
    const double u = ds.jets(r, 0), ux = ds.jets(r, 1), uxx = ds.jets(r, 2), uxxx = ds.jets(r, 3);
    const double ut = ds.jets(r, ds.temporal_col(1));
    const double utt = ds.jets(r, ds.temporal_col(2));
    double rhs = 0, lhs = ut;
    switch (cfg.problem.kind) {
      case ProblemKind::kKdv: rhs = -u * ux + cfg.problem.dispersion_sign * cfg.problem.b * uxxx; break;
      case ProblemKind::kBurgers: rhs = -u * ux + cfg.problem.a * uxx; break;
      case ProblemKind::kWave: rhs = cfg.problem.wave_speed_sq * uxx; lhs = utt; break;
      case ProblemKind::kChaffeeInfante: rhs = uxx + cfg.problem.lambda * (u * u * u - u); break;
    }
    sr += (lhs - rhs) * (lhs - rhs);
    st += lhs * lhs;
  }
  return std::sqrt(sr / st);
}

int main(int argc, char** argv) {
  // usage: probe_pipeline <preset> <seed> [key=value ...]
  ExperimentConfig cfg = preset(argv[1]);
  cfg.seed = std::strtoull(argv[2], nullptr, 10);
  cfg.cache_dir = "/root/proj/build/accept_cache";
  for (int i = 3; i < argc; ++i) {
    std::string kv = argv[i];
    auto eq = kv.find('=');
    std::string k = kv.substr(0, eq);
    double v = std::strtod(kv.c_str() + eq + 1, nullptr);
    if (k == "samples") cfg.sample_count = (int)v;
    else if (k == "width") cfg.net.width = (int)v;
    else if (k == "depth") cfg.net.hidden_layers = (int)v;
    else if (k == "fls") cfg.net.first_layer_scale = v;
    else if (k == "lr") cfg.train.learning_rate = v;
    else if (k == "decay") cfg.train.lr_decay = v;
    else if (k == "epochs") cfg.train.max_epochs = (int)v;
    else if (k == "batch") cfg.train.batch_size = (int)v;
    else if (k == "eps") cfg.ga.epsilon = v;
    else if (k == "pop") cfg.ga.population = (int)v;
    else if (k == "gens") cfg.ga.max_generations = (int)v;
    else if (k == "nocache") cfg.cache_dir = "";
    else { std::fprintf(stderr, "unknown key %s\n", k.c_str()); return 1; }
  }
  cfg.train.patience = cfg.train.max_epochs;

  Field field = obtain_dataset(cfg);
  auto t0 = Clock::now();
  auto samples = sample_training_data(field, (std::size_t)cfg.sample_count, derive_seed(cfg.seed, "sample"));
  SurrogateNet net = SurrogateNet::init_random(cfg.net.layer_sizes(), cfg.net.activation,
                                               derive_seed(cfg.seed, "init"), cfg.net.first_layer_scale);
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "train");
  TrainResult tr = train(net, samples, tc);
  double train_s = secs(t0);

  t0 = Clock::now();
  MetaDataset meta = generate_meta_data(net, cfg.meta);
  double meta_s = secs(t0);

  double res = residual_ratio(cfg, meta);

  GaConfig gc = cfg.ga;
  gc.seed = derive_seed(cfg.seed, "ga");
  FitnessRecord truth = fitness(canonicalize(cfg.truth.genome), meta, gc);

  t0 = Clock::now();
  DiscoveryResult result = evolve(meta, gc);
  double ga_s = secs(t0);

  const bool match = result.best.genome == canonicalize(cfg.truth.genome);
  std::printf("%s seed=%llu | train %.0fs val=%.2e | meta %.1fs res=%.3f | truth mse=%.3e fit=%.3e | best %s mse=%.3e fit=%.3e | ga %.0fs %s\n",
              argv[1], (unsigned long long)cfg.seed, train_s, tr.best_val, meta_s, res,
              truth.fit.mse, truth.fitness, to_bracket(result.best.genome).c_str(),
              result.best.fit.mse, result.best.fitness, ga_s, match ? "MATCH" : "MISS");
  if (match) {
    std::printf("  coeffs: ");
    for (Eigen::Index i = 0; i < result.best.fit.coeffs.size(); ++i)
      std::printf("%.4g ", result.best.fit.coeffs(i));
    std::printf("\n");
  }
  return 0;
}
