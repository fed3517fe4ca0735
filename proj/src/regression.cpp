#include "evopde/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "evopde/errors.hpp"

namespace evopde {

FitResult least_squares(const LinearSystem& sys) {
  const Eigen::Index n = sys.design.rows();
  const Eigen::Index m = sys.design.cols();
  if (sys.target.size() != n)
    throw StructuralError("target length does not match design rows");
  if (n < m)
    throw StructuralError("least squares needs at least as many rows as columns");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(sys.design);
  Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  Eigen::VectorXd qty = (qr.householderQ().transpose() * sys.target).head(m);

  // SVD of the small triangular factor: minimum-norm solution plus a
  // condition estimate in one pass.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double s_max = sv.size() > 0 ? sv(0) : 0.0;
  const double s_min = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;

  FitResult out;
  out.condition_flag = !(s_min > 0.0) || s_max / s_min > 1e10;

  const double cutoff = s_max * 1e-13;
  Eigen::VectorXd inv_s(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    inv_s(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
  out.coeffs = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose() * qty;

  out.mse = (sys.target - sys.design * out.coeffs).squaredNorm() /
            static_cast<double>(n);
  return out;
}

std::string LibraryTerm::name() const {
  std::string s;
  if (u_power == 0 && deriv_order == 0) return "1";
  for (int p = 0; p < u_power; ++p) {
    if (!s.empty()) s += '*';
    s += 'u';
  }
  if (deriv_order > 0) {
    if (!s.empty()) s += '*';
    s += "u_";
    s.append(static_cast<std::size_t>(deriv_order), 'x');
  }
  return s;
}

FixedLibrary FixedLibrary::powers_and_derivatives(const MetaDataset& data,
                                                  int max_power, int max_order) {
  if (max_order > data.x_order)
    throw StructuralError("library derivative order exceeds meta-data orders");
  FixedLibrary lib;
  const Eigen::Index n = data.rows();
  lib.columns.resize(n, (max_power + 1) * (max_order + 1));
  Eigen::Index col = 0;
  for (int q = 0; q <= max_order; ++q) {
    for (int p = 0; p <= max_power; ++p) {
      lib.terms.push_back({p, q});
      Eigen::VectorXd c = Eigen::VectorXd::Ones(n);
      for (int k = 0; k < p; ++k)
        c = c.cwiseProduct(data.jets.col(data.spatial_col(0)));
      if (q > 0) c = c.cwiseProduct(data.jets.col(data.spatial_col(q)));
      lib.columns.col(col++) = c;
    }
  }
  return lib;
}

FixedLibrary FixedLibrary::burgers12(const MetaDataset& data) {
  return powers_and_derivatives(data, 2, 3);
}

FixedLibrary FixedLibrary::chaffee16(const MetaDataset& data) {
  return powers_and_derivatives(data, 3, 3);
}

FixedLibrary FixedLibrary::by_name(const std::string& name, const MetaDataset& data) {
  if (name == "burgers12") return burgers12(data);
  if (name == "chaffee16") return chaffee16(data);
  throw ConfigError("unknown library '" + name + "'");
}

namespace {

// Ridge solve restricted to the active columns, on the normalized scale.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& cols, const Eigen::VectorXd& y,
                            double lambda) {
  Eigen::MatrixXd gram = cols.transpose() * cols;
  gram.diagonal().array() += lambda;
  return gram.ldlt().solve(cols.transpose() * y);
}

}  // namespace

StridgeResult stridge(const FixedLibrary& library, const Eigen::VectorXd& target,
                      double ridge_lambda, double threshold, int max_iters) {
  if (threshold < 0) throw ConfigError("stridge threshold must be >= 0");
  const Eigen::Index n = library.columns.rows();
  const Eigen::Index m = library.columns.cols();
  if (target.size() != n)
    throw StructuralError("target length does not match library rows");

  // Unit 2-norm column and target normalization, so thresholds are
  // dimensionless fractions of the target magnitude.
  Eigen::MatrixXd norm_cols = library.columns;
  Eigen::VectorXd scales(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double nrm = norm_cols.col(j).norm();
    scales(j) = nrm > 0 ? nrm : 1.0;
    norm_cols.col(j) /= scales(j);
  }
  const double target_norm = target.norm();
  const Eigen::VectorXd norm_target =
      target_norm > 0 ? (target / target_norm).eval() : target;

  StridgeResult out;
  out.threshold = threshold;
  std::vector<int> active(m);
  for (Eigen::Index j = 0; j < m; ++j) active[static_cast<std::size_t>(j)] = static_cast<int>(j);

  for (int iter = 0; iter < max_iters && !active.empty(); ++iter) {
    out.support_history.push_back(active);
    Eigen::MatrixXd cols(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j)
      cols.col(static_cast<Eigen::Index>(j)) = norm_cols.col(active[j]);
    Eigen::VectorXd zeta = ridge_solve(cols, norm_target, ridge_lambda);

    std::vector<int> kept;
    for (std::size_t j = 0; j < active.size(); ++j)
      if (std::abs(zeta(static_cast<Eigen::Index>(j))) >= threshold)
        kept.push_back(active[j]);
    if (kept.size() == active.size()) break;  // fixed point
    active = std::move(kept);
  }
  out.support = active;

  out.fit.coeffs = Eigen::VectorXd::Zero(m);
  if (active.empty()) {
    out.fit.mse = target.squaredNorm() / static_cast<double>(n);
    return out;
  }

  // Final unregularized pass on the survivors, raw scale.
  LinearSystem sys;
  sys.target = target;
  sys.design.resize(n, static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j)
    sys.design.col(static_cast<Eigen::Index>(j)) = library.columns.col(active[j]);
  FitResult final = least_squares(sys);
  out.fit.mse = final.mse;
  out.fit.condition_flag = final.condition_flag;
  for (std::size_t j = 0; j < active.size(); ++j)
    out.fit.coeffs(active[j]) = final.coeffs(static_cast<Eigen::Index>(j));
  return out;
}

StridgeResult stridge_sweep(const FixedLibrary& library,
                            const Eigen::VectorXd& target, double ridge_lambda,
                            const std::vector<double>& thresholds, int max_iters,
                            double penalty) {
  if (thresholds.empty()) throw ConfigError("stridge sweep needs thresholds");
  StridgeResult best;
  double best_score = std::numeric_limits<double>::infinity();
  for (double thr : thresholds) {
    StridgeResult r = stridge(library, target, ridge_lambda, thr, max_iters);
    const double score = r.fit.mse + penalty * static_cast<double>(r.support.size());
    if (score < best_score) {
      best_score = score;
      best = std::move(r);
    }
  }
  return best;
}

}  // namespace evopde
