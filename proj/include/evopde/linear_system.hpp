#pragma once

#include <Eigen/Core>
#include <span>

#include "evopde/genome.hpp"
#include "evopde/jets.hpp"

namespace evopde {

/// Regression system target = design * coeffs, one row per meta point and
/// one design column per rhs module.
struct LinearSystem {
  Eigen::VectorXd target;
  Eigen::MatrixXd design;
};

/// Product over the module's genes of the matching derivative values.
/// derivs_by_order[k] is the k-th x-derivative (order 0 = u).
double evaluate_module(const TermModule& m, std::span<const double> derivs_by_order);

/// Design column of one module over the whole dataset.
Eigen::VectorXd module_column(const TermModule& m, const MetaDataset& data);

/// Assemble the regression system for a canonical genome: the target is
/// the lhs temporal-derivative column, design column j evaluates module j.
LinearSystem build_system(const Genome& g, const MetaDataset& data);

}  // namespace evopde
