#include "evopde/linear_system.hpp"

#include "evopde/errors.hpp"

namespace evopde {

double evaluate_module(const TermModule& m, std::span<const double> derivs_by_order) {
  if (m.genes.empty()) throw StructuralError("empty module");
  double prod = 1.0;
  for (int gene : m.genes) {
    if (gene < 0 || static_cast<std::size_t>(gene) >= derivs_by_order.size())
      throw StructuralError("module gene " + std::to_string(gene) +
                            " exceeds available derivative orders");
    prod *= derivs_by_order[static_cast<std::size_t>(gene)];
  }
  return prod;
}

Eigen::VectorXd module_column(const TermModule& m, const MetaDataset& data) {
  for (int gene : m.genes)
    if (gene < 0 || gene > data.x_order)
      throw StructuralError("module gene " + std::to_string(gene) +
                            " exceeds available derivative orders");
  const Eigen::Index n = data.rows();
  Eigen::VectorXd col(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double prod = 1.0;
    for (int gene : m.genes) prod *= data.jets(r, data.spatial_col(gene));
    col(r) = prod;
  }
  return col;
}

LinearSystem build_system(const Genome& g, const MetaDataset& data) {
  if (g.modules.empty()) throw StructuralError("genome has no rhs modules");
  LinearSystem sys;
  sys.target = data.target_column(g.lhs);
  sys.design.resize(data.rows(), static_cast<Eigen::Index>(g.modules.size()));
  for (std::size_t j = 0; j < g.modules.size(); ++j)
    sys.design.col(static_cast<Eigen::Index>(j)) = module_column(g.modules[j], data);
  return sys;
}

}  // namespace evopde
