#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evopde/rng.hpp"

namespace evopde {

/// One equation term: a product of derivative factors. Gene k stands for
/// the k-th x-derivative of u, gene 0 for u itself. [0,1] is u*u_x.
struct TermModule {
  std::vector<int> genes;

  int gene_count() const { return static_cast<int>(genes.size()); }
  bool operator==(const TermModule&) const = default;
  auto operator<=>(const TermModule&) const = default;
};

/// Candidate PDE: a single temporal-derivative gene on the left (1 = u_t,
/// 2 = u_tt) and a sum of term modules on the right.
struct Genome {
  int lhs = 1;
  std::vector<TermModule> modules;

  /// Total gene count over all rhs modules; the length used by the
  /// fitness penalty.
  int length() const;

  bool operator==(const Genome&) const = default;
  auto operator<=>(const Genome&) const = default;
};

/// Basic genes available when sampling genomes, plus the hard order caps
/// mutation may not exceed.
struct GenePool {
  std::vector<int> lhs_options = {1, 2};
  std::vector<int> rhs_options = {0, 1, 2, 3};
  int max_spatial_order = 3;
  int max_temporal_order = 2;
  int max_initial_modules = 3;
  int max_genes_per_module = 2;

  void validate() const;
};

/// Sort genes within modules, drop duplicate modules, sort modules.
/// Idempotent; multiplication and addition both commute so this is the
/// genome's identity for equality and convergence checks.
Genome canonicalize(const Genome& g);

bool is_canonical(const Genome& g);

/// Throws StructuralError on empty modules, negative genes or bad lhs.
void validate_genome(const Genome& g, const GenePool& pool);

Genome random_genome(const GenePool& pool, Rng& rng);

/// Bracket notation, e.g. "[1],{[0,1],[3]}".
std::string to_bracket(const Genome& g);
Genome from_bracket(const std::string& text);

/// Human-readable equation, e.g. "u_t = -1.000*u_x + 0.100*u_xx".
/// Coefficients print with at least three decimals, extended until the
/// printed value is within 0.01% of the true one.
std::string render(const Genome& g, const std::vector<double>& coeffs);

std::string render_module(const TermModule& m);
std::string format_coefficient(double c);

/// Inverse of render: recovers the canonical genome and its coefficients
/// from the rendered text. Used by the report reader.
std::pair<Genome, std::vector<double>> parse_equation(const std::string& text);

}  // namespace evopde
