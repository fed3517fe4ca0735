#include "evopde/jets.hpp"

#include <cmath>

#include "evopde/errors.hpp"
#include "evopde/parallel.hpp"
#include "evopde/series.hpp"

namespace evopde {

namespace detail {

JetWorker::JetWorker(const SurrogateNet& net, int max_order)
    : net_(net), n_(max_order + 1) {
  if (max_order < 0) throw StructuralError("derivative order must be >= 0");
  const std::size_t buf = static_cast<std::size_t>(net.max_width()) * n_;
  a_.resize(buf);
  z_.resize(buf);
  aux_.resize(n_);
  xs_.resize(n_);
  ts_.resize(n_);
}

void JetWorker::compute(double x, double t, Axis axis, int order, double* out) {
  const int n = order + 1;
  const InputNorm& norm = net_.norm_;

  for (int c = 0; c < n; ++c) xs_[c] = ts_[c] = 0.0;
  xs_[0] = norm.nx(x);
  ts_[0] = norm.nt(t);
  if (n > 1) (axis == Axis::kX ? xs_ : ts_)[1] = 1.0;

  // Input layer activations: neuron 0 carries x, neuron 1 carries t.
  for (int c = 0; c < n; ++c) {
    a_[c] = xs_[c];
    a_[n + c] = ts_[c];
  }

  const int n_layers = net_.layer_count();
  for (int l = 0; l < n_layers; ++l) {
    const auto& w = net_.weights_[l];
    const auto& b = net_.biases_[l];
    const int out_w = static_cast<int>(w.rows());
    const int in_w = static_cast<int>(w.cols());
    for (int i = 0; i < out_w; ++i) {
      double* zi = z_.data() + static_cast<std::size_t>(i) * n;
      for (int c = 0; c < n; ++c) zi[c] = c == 0 ? b(i) : 0.0;
      for (int j = 0; j < in_w; ++j) {
        const double wij = w(i, j);
        const double* aj = a_.data() + static_cast<std::size_t>(j) * n;
        for (int c = 0; c < n; ++c) zi[c] += wij * aj[c];
      }
    }
    if (l + 1 < n_layers) {
      for (int i = 0; i < out_w; ++i) {
        const double* zi = z_.data() + static_cast<std::size_t>(i) * n;
        double* ai = a_.data() + static_cast<std::size_t>(i) * n;
        if (net_.activation_ == Activation::kSin)
          series_kernel::sin_cos(zi, ai, aux_.data(), n);
        else
          series_kernel::tanh(zi, ai, aux_.data(), n);
      }
    }
  }

  // Rescale Taylor coefficients to derivatives in raw coordinates:
  // d^k u / d axis^k = coeffs[k] * k! / scale^k. The k = 0 factor is
  // exactly 1.0, keeping the value bit-identical to a plain forward pass.
  const double scale = axis == Axis::kX ? norm.x_scale : norm.t_scale;
  double factor = 1.0;
  for (int k = 0; k < n; ++k) {
    out[k] = z_[k] * factor;
    factor *= static_cast<double>(k + 1) / scale;
  }
}

}  // namespace detail

DerivativeJet derivatives_at(const SurrogateNet& net, double x, double t,
                             Axis axis, int max_order) {
  net.validate();
  detail::JetWorker worker(net, max_order);
  DerivativeJet jet;
  jet.derivs.resize(static_cast<std::size_t>(max_order) + 1);
  worker.compute(x, t, axis, max_order, jet.derivs.data());
  return jet;
}

Eigen::VectorXd MetaDataset::target_column(int temporal_order) const {
  if (temporal_order < 1 || temporal_order > t_order)
    throw StructuralError("temporal order " + std::to_string(temporal_order) +
                          " not present in meta-data");
  return jets.col(temporal_col(temporal_order));
}

MetaDataset generate_meta_data(const SurrogateNet& net, const MetaGridSpec& grid) {
  if (grid.nx <= 0 || grid.nt <= 0)
    throw StructuralError("meta grid must have positive extent");
  if (grid.x_order < 0 || grid.t_order < 1)
    throw StructuralError("meta grid derivative orders invalid");
  net.validate();

  const std::size_t n_rows = static_cast<std::size_t>(grid.nx) * grid.nt;
  MetaDataset ds;
  ds.x_order = grid.x_order;
  ds.t_order = grid.t_order;
  ds.xs.resize(n_rows);
  ds.ts.resize(n_rows);
  ds.jets.resize(static_cast<Eigen::Index>(n_rows), grid.x_order + 1 + grid.t_order);

  parallel_for(n_rows, [&](std::size_t begin, std::size_t end) {
    detail::JetWorker worker(net, std::max(grid.x_order, grid.t_order));
    std::vector<double> jx(static_cast<std::size_t>(grid.x_order) + 1);
    std::vector<double> jt(static_cast<std::size_t>(grid.t_order) + 1);
    for (std::size_t r = begin; r < end; ++r) {
      const int ix = static_cast<int>(r / grid.nt);
      const int it = static_cast<int>(r % grid.nt);
      const double x = grid.x0 + grid.dx * ix;
      const double t = grid.t0 + grid.dt * it;
      ds.xs[r] = x;
      ds.ts[r] = t;
      worker.compute(x, t, Axis::kX, grid.x_order, jx.data());
      worker.compute(x, t, Axis::kT, grid.t_order, jt.data());
      const auto row = static_cast<Eigen::Index>(r);
      for (int k = 0; k <= grid.x_order; ++k) ds.jets(row, k) = jx[k];
      for (int k = 1; k <= grid.t_order; ++k)
        ds.jets(row, grid.x_order + k) = jt[k];
    }
  });
  return ds;
}

}  // namespace evopde
