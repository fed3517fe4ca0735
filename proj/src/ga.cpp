#include "evopde/ga.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "evopde/errors.hpp"
#include "evopde/linear_system.hpp"
#include "evopde/parallel.hpp"

namespace evopde {

void GaConfig::validate() const {
  if (population < 4 || population % 2 != 0)
    throw ConfigError("population size must be even and >= 4");
  if (max_generations < 0) throw ConfigError("max_generations must be >= 0");
  for (double p : {crossover_rate, order_mutation_prob, add_module_prob,
                   delete_module_prob})
    if (p < 0.0 || p > 1.0) throw ConfigError("probabilities must lie in [0, 1]");
  if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  pool.validate();
}

namespace detail {

void swap_modules(Genome& a, Genome& b, std::size_t i, std::size_t j) {
  if (i >= a.modules.size() || j >= b.modules.size())
    throw StructuralError("module swap index out of range");
  std::swap(a.modules[i], b.modules[j]);
}

int order_mutate_value(int gene, int max_spatial_order, Rng& rng) {
  if (gene > 0) return gene - 1;
  return rng.uniform_int(1, max_spatial_order);
}

TermModule random_module(const GenePool& pool, Rng& rng) {
  TermModule m;
  const int n_genes = rng.uniform_int(1, pool.max_genes_per_module);
  for (int k = 0; k < n_genes; ++k)
    m.genes.push_back(pool.rhs_options[rng.below(pool.rhs_options.size())]);
  return m;
}

}  // namespace detail

std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b,
                                    double rate, Rng& rng) {
  Genome ca = a, cb = b;
  if (rng.bernoulli(rate)) {
    const std::size_t i = rng.below(ca.modules.size());
    const std::size_t j = rng.below(cb.modules.size());
    detail::swap_modules(ca, cb, i, j);
  }
  return {canonicalize(ca), canonicalize(cb)};
}

Genome mutate(const Genome& g, const GaConfig& cfg, Rng& rng) {
  Genome out = g;

  // Order mutation, per rhs gene.
  for (auto& m : out.modules)
    for (auto& gene : m.genes)
      if (rng.bernoulli(cfg.order_mutation_prob))
        gene = detail::order_mutate_value(gene, cfg.pool.max_spatial_order, rng);

  // Add-module mutation.
  if (rng.bernoulli(cfg.add_module_prob))
    out.modules.push_back(detail::random_module(cfg.pool, rng));

  // Delete-module mutation, skipped when only one module remains.
  if (rng.bernoulli(cfg.delete_module_prob) && out.modules.size() > 1) {
    const std::size_t victim = rng.below(out.modules.size());
    out.modules.erase(out.modules.begin() + static_cast<std::ptrdiff_t>(victim));
  }

  // The lhs only has order mutation, and it resamples the temporal order
  // uniformly among the other options so u_tt stays reachable from a pool
  // holding only u_t.
  if (cfg.pool.max_temporal_order > 1 && rng.bernoulli(cfg.order_mutation_prob)) {
    int next = rng.uniform_int(1, cfg.pool.max_temporal_order - 1);
    if (next >= out.lhs) ++next;
    out.lhs = next;
  }

  return canonicalize(out);
}

namespace {

struct GenomeHash {
  std::size_t operator()(const Genome& g) const {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(g.lhs);
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    for (const auto& m : g.modules) {
      mix(0xfeed);
      for (int gene : m.genes) mix(static_cast<std::uint64_t>(gene) + 1);
    }
    return static_cast<std::size_t>(h);
  }
};

struct ModuleHash {
  std::size_t operator()(const TermModule& m) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int gene : m.genes)
      h = (h ^ (static_cast<std::uint64_t>(gene) + 1)) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

constexpr std::size_t kColumnCacheCap = 2048;

double fitness_value(const FitResult& fit, double epsilon, int genome_length) {
  if (fit.condition_flag || !std::isfinite(fit.mse)) return kFitnessSentinel;
  return fit.mse + epsilon * static_cast<double>(genome_length);
}

// Shared evaluation machinery for evolve(): module columns are cached per
// dataset so repeated genomes and shared terms cost one evaluation each.
class Evaluator {
 public:
  Evaluator(const MetaDataset& data, const GaConfig& cfg)
      : data_(data), cfg_(cfg) {
    for (int k = 1; k <= data.t_order; ++k) {
      targets_.push_back(data.target_column(k));
      const auto& t = targets_.back();
      const double mean = t.mean();
      target_var_.push_back((t.array() - mean).square().mean());
    }
  }

  double epsilon_for(int lhs) const {
    if (!cfg_.epsilon_relative) return cfg_.epsilon;
    const double var = target_var_[static_cast<std::size_t>(lhs - 1)];
    return cfg_.epsilon * (var > 0 ? var : 1.0);
  }

  /// Evaluate a batch of canonical genomes; results align with the input.
  std::vector<FitnessRecord> evaluate(const std::vector<Genome>& genomes) {
    // Bound the column cache; after a flush everything this batch needs
    // is recomputed below.
    if (columns_.size() > kColumnCacheCap) columns_.clear();

    // Warm the cache: collect missing modules in first-appearance order,
    // then fill the preallocated slots in parallel.
    std::vector<TermModule> missing;
    for (const auto& g : genomes)
      for (const auto& m : g.modules)
        if (!columns_.count(m)) {
          columns_.emplace(m, Eigen::VectorXd());
          missing.push_back(m);
        }
    parallel_for(missing.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i)
        columns_[missing[i]] = module_column(missing[i], data_);
    });

    std::vector<FitnessRecord> records(genomes.size());
    std::vector<const Genome*> todo;
    std::vector<std::size_t> todo_idx;
    for (std::size_t i = 0; i < genomes.size(); ++i) {
      auto it = cache_.find(genomes[i]);
      if (it != cache_.end()) {
        records[i] = it->second;
      } else {
        todo.push_back(&genomes[i]);
        todo_idx.push_back(i);
      }
    }
    parallel_for(todo.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i)
        records[todo_idx[i]] = evaluate_one(*todo[i]);
    });
    for (std::size_t i : todo_idx) cache_.emplace(genomes[i], records[i]);
    return records;
  }

  FitnessRecord evaluate_one(const Genome& g) const {
    FitnessRecord rec;
    rec.genome = g;
    LinearSystem sys;
    sys.target = targets_[static_cast<std::size_t>(g.lhs - 1)];
    sys.design.resize(data_.rows(), static_cast<Eigen::Index>(g.modules.size()));
    for (std::size_t j = 0; j < g.modules.size(); ++j)
      sys.design.col(static_cast<Eigen::Index>(j)) = columns_.at(g.modules[j]);
    rec.fit = least_squares(sys);
    rec.fitness = fitness_value(rec.fit, epsilon_for(g.lhs), g.length());
    return rec;
  }

 private:
  const MetaDataset& data_;
  const GaConfig& cfg_;
  std::vector<Eigen::VectorXd> targets_;
  std::vector<double> target_var_;
  std::unordered_map<TermModule, Eigen::VectorXd, ModuleHash> columns_;
  std::unordered_map<Genome, FitnessRecord, GenomeHash> cache_;
};

}  // namespace

FitnessRecord fitness(const Genome& g, const MetaDataset& data, const GaConfig& cfg) {
  const Genome canon = canonicalize(g);
  if (canon.lhs < 1 || canon.lhs > data.t_order)
    throw StructuralError("genome lhs order not covered by meta-data");
  LinearSystem sys = build_system(canon, data);
  FitResult fit = least_squares(sys);
  double epsilon = cfg.epsilon;
  if (cfg.epsilon_relative) {
    const auto& t = sys.target;
    const double mean = t.mean();
    const double var = (t.array() - mean).square().mean();
    epsilon *= var > 0 ? var : 1.0;
  }
  return {canon, fit, fitness_value(fit, epsilon, canon.length())};
}

DiscoveryResult evolve(const MetaDataset& data, const GaConfig& cfg) {
  cfg.validate();
  if (data.rows() == 0) throw StructuralError("empty meta dataset");
  const int pop_size = cfg.population;

  Evaluator evaluator(data, cfg);

  Rng init_rng(derive_seed(cfg.seed, "ga-init"));
  std::vector<Genome> parents;
  parents.reserve(pop_size);
  for (int i = 0; i < pop_size; ++i)
    parents.push_back(random_genome(cfg.pool, init_rng));

  auto parent_records = evaluator.evaluate(parents);

  DiscoveryResult result;
  auto better = [](const FitnessRecord& a, const FitnessRecord& b) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    return a.genome < b.genome;  // deterministic tie break
  };
  auto record_generation = [&](int gen, const std::vector<FitnessRecord>& records) {
    const FitnessRecord* best = &records.front();
    for (const auto& r : records)
      if (better(r, *best)) best = &r;
    GenerationBest gb;
    gb.generation = gen;
    gb.genome = best->genome;
    gb.fitness = best->fitness;
    gb.mse = best->fit.mse;
    gb.coeffs.assign(best->fit.coeffs.data(),
                     best->fit.coeffs.data() + best->fit.coeffs.size());
    result.trace.push_back(std::move(gb));
    if (result.trace.size() == 1 || better(*best, result.best)) result.best = *best;
  };
  record_generation(0, parent_records);

  std::vector<std::uint32_t> perm(pop_size);
  for (int gen = 1; gen <= cfg.max_generations; ++gen) {
    std::vector<Genome> children;
    children.reserve(2 * pop_size + 1);

    // Each parent crosses twice: two independent random pairings, one
    // pair of children per couple.
    for (int round = 0; round < 2; ++round) {
      Rng pair_rng(derive_seed(cfg.seed, "ga-pairing",
                               static_cast<std::uint64_t>(gen) * 2 + round));
      for (int i = 0; i < pop_size; ++i) perm[i] = static_cast<std::uint32_t>(i);
      for (int i = pop_size; i > 1; --i)
        std::swap(perm[i - 1], perm[pair_rng.below(static_cast<std::uint64_t>(i))]);
      for (int p = 0; p < pop_size; p += 2) {
        auto [c1, c2] = crossover(parents[perm[p]], parents[perm[p + 1]],
                                  cfg.crossover_rate, pair_rng);
        children.push_back(std::move(c1));
        children.push_back(std::move(c2));
      }
    }

    // Mutation randomness is keyed by (seed, generation, child index) so
    // any parallel schedule sees the same genomes.
    for (std::size_t c = 0; c < children.size(); ++c) {
      Rng mut_rng(derive_seed(cfg.seed, "ga-mutate",
                              (static_cast<std::uint64_t>(gen) << 32) | c));
      children[c] = mutate(children[c], cfg, mut_rng);
    }

    if (cfg.elitism) {
      const FitnessRecord* best_parent = &parent_records.front();
      for (const auto& r : parent_records)
        if (better(r, *best_parent)) best_parent = &r;
      children.push_back(best_parent->genome);
    }

    auto child_records = evaluator.evaluate(children);

    std::vector<std::size_t> order(children.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return better(child_records[a], child_records[b]);
    });

    std::vector<Genome> next;
    std::vector<FitnessRecord> next_records;
    next.reserve(pop_size);
    next_records.reserve(pop_size);
    for (int i = 0; i < pop_size; ++i) {
      next.push_back(children[order[static_cast<std::size_t>(i)]]);
      next_records.push_back(child_records[order[static_cast<std::size_t>(i)]]);
    }
    parents = std::move(next);
    parent_records = std::move(next_records);

    record_generation(gen, parent_records);
  }

  // Convergence: last index where the best genome differs from the final
  // one, plus one.
  int conv = 0;
  for (std::size_t i = result.trace.size(); i-- > 0;) {
    if (!(result.trace[i].genome == result.trace.back().genome)) {
      conv = static_cast<int>(i) + 1;
      break;
    }
  }
  result.convergence_generation = conv;
  return result;
}

}  // namespace evopde
