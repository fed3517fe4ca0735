#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "evopde/jets.hpp"
#include "evopde/linear_system.hpp"

namespace evopde {

struct FitResult {
  Eigen::VectorXd coeffs;
  double mse = 0.0;
  bool condition_flag = false;  // estimated condition number above 1e10
};

/// Minimum-norm least squares via QR plus an SVD of the triangular factor,
/// which doubles as the condition estimate.
FitResult least_squares(const LinearSystem& sys);

/// One term of a fixed candidate library: u^power * (d^order u / dx^order).
/// order 0 with power 0 is the constant column.
struct LibraryTerm {
  int u_power = 0;
  int deriv_order = 0;

  std::string name() const;
  bool operator==(const LibraryTerm&) const = default;
};

/// Pre-enumerated candidate library over a meta dataset, used by the
/// sparse-regression baseline.
struct FixedLibrary {
  std::vector<LibraryTerm> terms;
  Eigen::MatrixXd columns;

  /// 12 terms: u^p * d^q for p in 0..2, q in 0..3.
  static FixedLibrary burgers12(const MetaDataset& data);
  /// 16 terms: u^p * d^q for p in 0..3, q in 0..3.
  static FixedLibrary chaffee16(const MetaDataset& data);
  static FixedLibrary powers_and_derivatives(const MetaDataset& data,
                                             int max_power, int max_order);
  static FixedLibrary by_name(const std::string& name, const MetaDataset& data);
};

struct StridgeResult {
  FitResult fit;                   // coeffs on the raw column scale
  std::vector<int> support;        // surviving column indices, ascending
  std::vector<std::vector<int>> support_history;
  double threshold = 0.0;
};

/// Sequential threshold ridge regression. Columns are normalized to unit
/// 2-norm internally; the threshold applies on that scale. Iterates ridge
/// solve + hard threshold until the support is stable, then finishes with
/// unregularized least squares on the survivors.
StridgeResult stridge(const FixedLibrary& library, const Eigen::VectorXd& target,
                      double ridge_lambda, double threshold, int max_iters);

/// Threshold sweep; picks the result with the lowest mse + penalty * nnz.
StridgeResult stridge_sweep(const FixedLibrary& library,
                            const Eigen::VectorXd& target, double ridge_lambda,
                            const std::vector<double>& thresholds, int max_iters,
                            double penalty);

}  // namespace evopde
