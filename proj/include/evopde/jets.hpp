#pragma once

#include <Eigen/Core>
#include <vector>

#include "evopde/net.hpp"

namespace evopde {

enum class Axis { kX, kT };

/// Value and pure derivatives along one axis: derivs[k] = d^k u / d axis^k.
struct DerivativeJet {
  std::vector<double> derivs;
};

/// Taylor coefficients of the net along one input axis, obtained by seeding
/// that input with the identity series, the other with a constant series,
/// and propagating through every layer. derivs[k] = coeffs[k] * k!, with
/// the chain-rule factor for input normalization folded in.
DerivativeJet derivatives_at(const SurrogateNet& net, double x, double t,
                             Axis axis, int max_order);

struct MetaGridSpec {
  double x0 = 0.0, dx = 1.0;
  int nx = 0;
  double t0 = 0.0, dt = 1.0;
  int nt = 0;
  int x_order = 4;
  int t_order = 2;
};

/// Collocation points with precomputed derivative jets. Row r covers grid
/// node (r / nt, r % nt). Column layout: u, u_x, .., u_x^(x_order), then
/// u_t, .., u_t^(t_order).
struct MetaDataset {
  std::vector<double> xs, ts;
  Eigen::MatrixXd jets;
  int x_order = 4;
  int t_order = 2;

  Eigen::Index rows() const { return jets.rows(); }
  int spatial_col(int order) const { return order; }
  int temporal_col(int order) const { return x_order + order; }

  /// The regression target for a genome with the given lhs order.
  Eigen::VectorXd target_column(int temporal_order) const;
};

MetaDataset generate_meta_data(const SurrogateNet& net, const MetaGridSpec& grid);

namespace detail {

/// Reusable propagation buffers for bulk jet extraction.
class JetWorker {
 public:
  JetWorker(const SurrogateNet& net, int max_order);

  /// out must hold max_order+1 doubles.
  void compute(double x, double t, Axis axis, int order, double* out);

 private:
  const SurrogateNet& net_;
  int n_;                      // series length
  std::vector<double> a_, z_, aux_, xs_, ts_;
};

}  // namespace detail

}  // namespace evopde
