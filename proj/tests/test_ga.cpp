#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "evopde/errors.hpp"
#include "evopde/ga.hpp"

using namespace evopde;

namespace {

MetaDataset random_jets(int n, std::uint64_t seed) {
  MetaDataset ds;
  ds.x_order = 4;
  ds.t_order = 2;
  ds.xs.assign(static_cast<std::size_t>(n), 0.0);
  ds.ts.assign(static_cast<std::size_t>(n), 0.0);
  ds.jets.resize(n, 7);
  Rng rng(seed);
  // Column scales grow with the derivative order the way they do for an
  // oscillatory solution; a small coefficient on u_xxx still carries an
  // O(1) term.
  const double scale[7] = {2, 6, 60, 1000, 2e4, 2, 6};
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < 7; ++c) ds.jets(r, c) = scale[c] * rng.uniform(-1.0, 1.0);
  return ds;
}

// Analytic heat-equation jets for u = exp(-t) sin(x) + exp(-4t) sin(2x):
// u_t = u_xx exactly, and no shorter genome over orders <= 3 fits.
MetaDataset heat_jets(int nx, int nt) {
  MetaDataset ds;
  ds.x_order = 4;
  ds.t_order = 2;
  const int n = nx * nt;
  ds.xs.resize(static_cast<std::size_t>(n));
  ds.ts.resize(static_cast<std::size_t>(n));
  ds.jets.resize(n, 7);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nt; ++j) {
      const double x = 0.1 + 2.9 * i / (nx - 1);
      const double t = 0.0 + 1.0 * j / (nt - 1);
      const int r = i * nt + j;
      ds.xs[static_cast<std::size_t>(r)] = x;
      ds.ts[static_cast<std::size_t>(r)] = t;
      const double e1 = std::exp(-t), e4 = std::exp(-4 * t);
      const double s1 = std::sin(x), c1 = std::cos(x);
      const double s2 = std::sin(2 * x), c2 = std::cos(2 * x);
      ds.jets(r, 0) = e1 * s1 + e4 * s2;
      ds.jets(r, 1) = e1 * c1 + 2 * e4 * c2;
      ds.jets(r, 2) = -e1 * s1 - 4 * e4 * s2;
      ds.jets(r, 3) = -e1 * c1 - 8 * e4 * c2;
      ds.jets(r, 4) = e1 * s1 + 16 * e4 * s2;
      ds.jets(r, 5) = -e1 * s1 - 4 * e4 * s2;   // u_t
      ds.jets(r, 6) = e1 * s1 + 16 * e4 * s2;   // u_tt
    }
  return ds;
}

GaConfig quick_config(std::uint64_t seed) {
  GaConfig cfg;
  cfg.population = 60;
  cfg.max_generations = 40;
  cfg.seed = seed;
  cfg.pool.max_genes_per_module = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config validation rejects bad settings") {
  MetaDataset ds = random_jets(10, 1);
  GaConfig cfg;
  cfg.population = 5;  // odd
  CHECK_THROWS_AS(evolve(ds, cfg), ConfigError);
  cfg.population = 2;  // too small
  CHECK_THROWS_AS(evolve(ds, cfg), ConfigError);
  cfg.population = 8;
  cfg.crossover_rate = 1.5;
  CHECK_THROWS_AS(evolve(ds, cfg), ConfigError);
  cfg.crossover_rate = 0.8;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(evolve(ds, cfg), ConfigError);
}

TEST_CASE("module swap reproduces the worked crossover example") {
  Genome a = from_bracket("[1],{[1],[2]}");
  Genome b = from_bracket("[1],{[1,3],[0,2]}");
  detail::swap_modules(a, b, 0, 0);
  CHECK(canonicalize(a) == canonicalize(from_bracket("[1],{[1,3],[2]}")));
  CHECK(canonicalize(b) == canonicalize(from_bracket("[1],{[1],[0,2]}")));
}

TEST_CASE("crossover at rate zero returns the parents unchanged") {
  Genome a = canonicalize(from_bracket("[1],{[0,1],[3]}"));
  Genome b = canonicalize(from_bracket("[2],{[2]}"));
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    auto [ca, cb] = crossover(a, b, 0.0, rng);
    CHECK(ca == a);
    CHECK(cb == b);
  }
}

TEST_CASE("crossover never touches the lhs genes") {
  Genome a = canonicalize(from_bracket("[1],{[0,1],[3]}"));
  Genome b = canonicalize(from_bracket("[2],{[2],[0,0]}"));
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    auto [ca, cb] = crossover(a, b, 1.0, rng);
    CHECK(ca.lhs == 1);
    CHECK(cb.lhs == 2);
  }
}

TEST_CASE("crossover conserves the module multiset across the pair") {
  Rng rng(7);
  GenePool pool;
  pool.max_genes_per_module = 3;
  for (int trial = 0; trial < 500; ++trial) {
    // Parents built with globally distinct modules so deduplication
    // cannot fire and the swap conservation is exact.
    Genome a = random_genome(pool, rng);
    Genome b = random_genome(pool, rng);
    std::set<TermModule> seen;
    auto distinct = [&seen](Genome& g) {
      for (auto& m : g.modules) {
        std::sort(m.genes.begin(), m.genes.end());
        while (seen.count(m)) {
          m.genes.push_back(0);
          std::sort(m.genes.begin(), m.genes.end());
        }
        seen.insert(m);
      }
    };
    distinct(a);
    distinct(b);
    a = canonicalize(a);
    b = canonicalize(b);

    std::multiset<TermModule> before;
    for (const auto& m : a.modules) before.insert(m);
    for (const auto& m : b.modules) before.insert(m);

    auto [ca, cb] = crossover(a, b, 1.0, rng);
    std::multiset<TermModule> after;
    for (const auto& m : ca.modules) after.insert(m);
    for (const auto& m : cb.modules) after.insert(m);
    CHECK(before == after);
  }
}

TEST_CASE("order mutation steps down and relaunches zeros") {
  Rng rng(9);
  for (int k = 1; k <= 4; ++k)
    CHECK(detail::order_mutate_value(k, 4, rng) == k - 1);

  std::set<int> reached;
  for (int i = 0; i < 2000; ++i) reached.insert(detail::order_mutate_value(0, 4, rng));
  CHECK(reached == std::set<int>{1, 2, 3, 4});
}

TEST_CASE("worked mutation examples") {
  // Order mutation on the first gene: [1],{[1,2],[3]} -> [1],{[0,2],[3]}
  Genome g = from_bracket("[1],{[1,2],[3]}");
  Rng rng(1);
  g.modules[0].genes[0] = detail::order_mutate_value(1, 3, rng);
  CHECK(canonicalize(g) == canonicalize(from_bracket("[1],{[0,2],[3]}")));

  // Add-module: [1],{[1,2],[3]} + [0,0] -> [1],{[0,0],[1,2],[3]}
  Genome h = from_bracket("[1],{[1,2],[3]}");
  h.modules.push_back(TermModule{{0, 0}});
  CHECK(canonicalize(h) == canonicalize(from_bracket("[1],{[0,0],[1,2],[3]}")));

  // Delete-module: [1],{[1,2],[4],[0,1],[3,1]} minus [3,1]
  Genome d = from_bracket("[1],{[1,2],[4],[0,1],[3,1]}");
  d.modules.erase(d.modules.begin() + 3);
  CHECK(canonicalize(d) == canonicalize(from_bracket("[1],{[0,1],[1,2],[4]}")));
}

TEST_CASE("mutation respects bounds and canonical form on 1e5 genomes") {
  GaConfig cfg;
  cfg.pool.max_genes_per_module = 3;
  cfg.pool.max_spatial_order = 3;
  Rng source(13);
  Rng mut(14);
  for (int i = 0; i < 100000; ++i) {
    Genome g = random_genome(cfg.pool, source);
    Genome m = mutate(g, cfg, mut);
    CHECK(is_canonical(m));
    REQUIRE(!m.modules.empty());
    CHECK(m.lhs >= 1);
    CHECK(m.lhs <= cfg.pool.max_temporal_order);
    bool bounds_ok = true;
    for (const auto& mod : m.modules) {
      if (mod.genes.empty()) bounds_ok = false;
      for (int gene : mod.genes)
        if (gene < 0 || gene > cfg.pool.max_spatial_order) bounds_ok = false;
    }
    CHECK(bounds_ok);
    // Add-module grows the count by at most one; deduplication and
    // delete-module may shrink it further but never empty it.
    const auto diff = static_cast<int>(m.modules.size()) -
                      static_cast<int>(g.modules.size());
    CHECK(diff <= 1);
  }
}

TEST_CASE("lhs mutation reaches the second temporal order from a pool of one") {
  GaConfig cfg;
  cfg.pool.lhs_options = {1};
  cfg.order_mutation_prob = 1.0;
  cfg.add_module_prob = 0.0;
  cfg.delete_module_prob = 0.0;
  Rng rng(15);
  Genome g = from_bracket("[1],{[2]}");
  bool reached_utt = false;
  for (int i = 0; i < 50 && !reached_utt; ++i)
    reached_utt = mutate(g, cfg, rng).lhs == 2;
  CHECK(reached_utt);
}

TEST_CASE("fitness of an exact fit is epsilon times the genome length") {
  MetaDataset ds = random_jets(100, 21);
  ds.jets.col(ds.temporal_col(1)) =
      2.0 * ds.jets.col(ds.spatial_col(1)) - 0.5 * ds.jets.col(ds.spatial_col(3));
  GaConfig cfg;
  cfg.epsilon = 1e-4;
  cfg.epsilon_relative = false;
  FitnessRecord rec = fitness(from_bracket("[1],{[1],[3]}"), ds, cfg);
  CHECK(rec.fitness == doctest::Approx(2e-4).epsilon(1e-6));
  CHECK(rec.fit.mse < 1e-20);
}

TEST_CASE("equal mse favors the shorter genome") {
  MetaDataset ds = random_jets(200, 22);
  ds.jets.col(ds.temporal_col(1)) = 1.5 * ds.jets.col(ds.spatial_col(1));
  GaConfig cfg;
  cfg.epsilon = 1e-4;
  cfg.epsilon_relative = false;
  // Both fit exactly; the longer one carries a junk module with a zero
  // coefficient.
  FitnessRecord short_rec = fitness(from_bracket("[1],{[1]}"), ds, cfg);
  FitnessRecord long_rec = fitness(from_bracket("[1],{[1],[2,3,3]}"), ds, cfg);
  CHECK(short_rec.fit.mse == doctest::Approx(long_rec.fit.mse).epsilon(1e-6));
  CHECK(short_rec.fitness < long_rec.fitness);
}

TEST_CASE("manufactured kdv jets rank the true genome above single modules") {
  MetaDataset ds = random_jets(400, 23);
  // u_t := -u u_x - 0.0025 u_xxx, exactly.
  for (Eigen::Index r = 0; r < ds.rows(); ++r)
    ds.jets(r, ds.temporal_col(1)) =
        -ds.jets(r, 0) * ds.jets(r, 1) - 0.0025 * ds.jets(r, 3);

  GaConfig cfg;
  FitnessRecord truth = fitness(from_bracket("[1],{[0,1],[3]}"), ds, cfg);
  CHECK(truth.fit.mse < 1e-20);

  // Brute force over every single-module genome with one or two genes of
  // order <= 3 (14 genomes).
  int enumerated = 0;
  for (int g1 = 0; g1 <= 3; ++g1) {
    FitnessRecord r = fitness(Genome{1, {TermModule{{g1}}}}, ds, cfg);
    CHECK(truth.fitness < r.fitness);
    ++enumerated;
    for (int g2 = g1; g2 <= 3; ++g2) {
      FitnessRecord r2 = fitness(Genome{1, {TermModule{{g1, g2}}}}, ds, cfg);
      CHECK(truth.fitness < r2.fitness);
      ++enumerated;
    }
  }
  CHECK(enumerated == 14);
}

TEST_CASE("ill-conditioned genomes receive the sentinel fitness") {
  MetaDataset ds = random_jets(50, 24);
  ds.jets.col(ds.spatial_col(2)) = ds.jets.col(ds.spatial_col(1));  // collinear
  GaConfig cfg;
  FitnessRecord rec = fitness(from_bracket("[1],{[1],[2]}"), ds, cfg);
  CHECK(rec.fitness == kFitnessSentinel);
}

TEST_CASE("scaling the target and epsilon together preserves the ranking") {
  MetaDataset ds = random_jets(300, 25);
  MetaDataset scaled = ds;
  const double c = 7.5;
  scaled.jets.col(ds.temporal_col(1)) *= c;

  GaConfig cfg;
  cfg.epsilon = 1e-4;
  cfg.epsilon_relative = false;
  GaConfig cfg_scaled = cfg;
  cfg_scaled.epsilon = cfg.epsilon * c * c;

  GenePool pool;
  pool.max_genes_per_module = 3;
  Rng rng(26);
  std::vector<Genome> genomes;
  for (int i = 0; i < 30; ++i) genomes.push_back(random_genome(pool, rng));

  std::vector<double> base_fit, scaled_fit;
  for (const auto& g : genomes) {
    Genome g1 = g;
    g1.lhs = 1;  // single target column keeps the comparison clean
    base_fit.push_back(fitness(g1, ds, cfg).fitness);
    scaled_fit.push_back(fitness(g1, scaled, cfg_scaled).fitness);
  }
  std::vector<std::size_t> base_order(genomes.size()), scaled_order(genomes.size());
  for (std::size_t i = 0; i < genomes.size(); ++i) base_order[i] = scaled_order[i] = i;
  std::sort(base_order.begin(), base_order.end(),
            [&](std::size_t a, std::size_t b) { return base_fit[a] < base_fit[b]; });
  std::sort(scaled_order.begin(), scaled_order.end(),
            [&](std::size_t a, std::size_t b) { return scaled_fit[a] < scaled_fit[b]; });
  CHECK(base_order == scaled_order);
  for (std::size_t i = 0; i < genomes.size(); ++i)
    if (base_fit[i] < kFitnessSentinel)
      CHECK(scaled_fit[i] == doctest::Approx(base_fit[i] * c * c).epsilon(1e-9));
}

TEST_CASE("evolve discovers the heat equation from analytic jets") {
  MetaDataset ds = heat_jets(40, 25);
  GaConfig cfg = quick_config(31);
  DiscoveryResult result = evolve(ds, cfg);
  CHECK(to_bracket(result.best.genome) == "[1],{[2]}");
  CHECK(result.best.fit.coeffs(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(result.convergence_generation <= cfg.max_generations);
}

TEST_CASE("evolve is deterministic for a fixed seed") {
  MetaDataset ds = heat_jets(20, 15);
  GaConfig cfg = quick_config(77);
  cfg.max_generations = 10;
  DiscoveryResult a = evolve(ds, cfg);
  DiscoveryResult b = evolve(ds, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].genome == b.trace[i].genome);
    CHECK(a.trace[i].fitness == b.trace[i].fitness);
    CHECK(a.trace[i].coeffs == b.trace[i].coeffs);
  }
  CHECK(a.best.genome == b.best.genome);
  CHECK(a.convergence_generation == b.convergence_generation);
}

TEST_CASE("zero generations reports only the initial population") {
  MetaDataset ds = heat_jets(10, 8);
  GaConfig cfg = quick_config(3);
  cfg.max_generations = 0;
  DiscoveryResult result = evolve(ds, cfg);
  CHECK(result.trace.size() == 1);
  CHECK(result.trace[0].generation == 0);
}

TEST_CASE("elitism makes the generation-best fitness non-increasing") {
  MetaDataset ds = heat_jets(20, 10);
  GaConfig cfg = quick_config(41);
  cfg.elitism = true;
  DiscoveryResult result = evolve(ds, cfg);
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i].fitness <= result.trace[i - 1].fitness + 1e-15);
}

TEST_CASE("overall best tracks the global minimum even without elitism") {
  MetaDataset ds = heat_jets(20, 10);
  GaConfig cfg = quick_config(43);
  DiscoveryResult result = evolve(ds, cfg);
  double min_fit = std::numeric_limits<double>::infinity();
  for (const auto& gb : result.trace) min_fit = std::min(min_fit, gb.fitness);
  CHECK(result.best.fitness <= min_fit);
}

TEST_CASE("every traced genome is canonical and within pool bounds") {
  MetaDataset ds = heat_jets(15, 10);
  GaConfig cfg = quick_config(51);
  cfg.pool.max_spatial_order = 4;
  DiscoveryResult result = evolve(ds, cfg);
  for (const auto& gb : result.trace) {
    CHECK(is_canonical(gb.genome));
    CHECK_NOTHROW(validate_genome(gb.genome, cfg.pool));
  }
}

TEST_CASE("a missing third-order gene is recovered by mutation") {
  // Exact jets for u_t = -u u_x - 0.0025 u_xxx, but the initial pool only
  // offers orders {0, 1, 2}; order 3 must arise from mutation.
  MetaDataset ds = random_jets(800, 61);
  for (Eigen::Index r = 0; r < ds.rows(); ++r)
    ds.jets(r, ds.temporal_col(1)) =
        -ds.jets(r, 0) * ds.jets(r, 1) - 0.0025 * ds.jets(r, 3);

  GaConfig cfg = quick_config(62);
  cfg.pool.rhs_options = {0, 1, 2};
  cfg.pool.max_spatial_order = 4;
  cfg.population = 100;
  cfg.max_generations = 60;
  DiscoveryResult result = evolve(ds, cfg);
  CHECK(to_bracket(result.best.genome) == "[1],{[0,1],[3]}");
}
