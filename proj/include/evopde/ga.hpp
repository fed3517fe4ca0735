#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "evopde/genome.hpp"
#include "evopde/jets.hpp"
#include "evopde/regression.hpp"

namespace evopde {

struct GaConfig {
  int population = 200;
  int max_generations = 100;
  double crossover_rate = 0.8;
  double order_mutation_prob = 0.1;  // per gene; also drives lhs mutation
  double add_module_prob = 0.3;      // per genome
  double delete_module_prob = 0.3;   // per genome
  // Length-penalty weight. With epsilon_relative the effective epsilon is
  // epsilon * var(target column), so rankings survive target rescaling.
  double epsilon = 1e-4;
  bool epsilon_relative = true;
  bool elitism = false;  // carry the best parent into the child pool
  GenePool pool;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitnessRecord {
  Genome genome;  // canonical
  FitResult fit;
  double fitness = 0.0;  // mse + epsilon * genome length
};

struct GenerationBest {
  int generation = 0;
  Genome genome;
  double fitness = 0.0;
  double mse = 0.0;
  std::vector<double> coeffs;
};

struct DiscoveryResult {
  FitnessRecord best;  // lowest fitness over every genome ever evaluated
  std::vector<GenerationBest> trace;  // entry per generation, 0 = initial
  // First generation from which the per-generation best genome never
  // changes again.
  int convergence_generation = 0;
};

/// With probability `rate`, swap one uniformly chosen rhs module between
/// the parents; otherwise return plain copies. Children are canonical.
std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b,
                                    double rate, Rng& rng);

/// The three rhs mutations (order, add-module, delete-module) plus the
/// lhs order mutation, each applied independently; result is canonical.
Genome mutate(const Genome& g, const GaConfig& cfg, Rng& rng);

/// Fitness = least-squares mse + epsilon * total rhs gene count.
/// Ill-conditioned systems receive a sentinel larger than any finite value.
FitnessRecord fitness(const Genome& g, const MetaDataset& data, const GaConfig& cfg);

DiscoveryResult evolve(const MetaDataset& data, const GaConfig& cfg);

/// Sentinel fitness assigned to ill-conditioned or non-finite fits.
inline constexpr double kFitnessSentinel = 1e300;

namespace detail {

void swap_modules(Genome& a, Genome& b, std::size_t i, std::size_t j);

/// Order mutation for one gene value: k > 0 drops to k - 1, 0 jumps to a
/// uniform order in [1, max_spatial_order].
int order_mutate_value(int gene, int max_spatial_order, Rng& rng);

/// Fresh module sampled exactly like an initial one.
TermModule random_module(const GenePool& pool, Rng& rng);

}  // namespace detail

}  // namespace evopde
