#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "evopde/errors.hpp"
#include "evopde/linear_system.hpp"
#include "evopde/regression.hpp"
#include "evopde/rng.hpp"

using namespace evopde;

namespace {

// Meta dataset with random jets; the tests wire exact linear relations
// into the temporal columns.
MetaDataset random_jets(int n, std::uint64_t seed) {
  MetaDataset ds;
  ds.x_order = 4;
  ds.t_order = 2;
  ds.xs.assign(static_cast<std::size_t>(n), 0.0);
  ds.ts.assign(static_cast<std::size_t>(n), 0.0);
  ds.jets.resize(n, 7);
  Rng rng(seed);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < 7; ++c) ds.jets(r, c) = rng.uniform(-2.0, 2.0);
  return ds;
}

}  // namespace

TEST_CASE("evaluate_module multiplies the matching derivative values") {
  const std::vector<double> jet{2.0, 3.0, 5.0, 7.0, 11.0};
  const std::vector<double> u_uxx{2.0, 0.0, 3.0};
  const std::vector<double> zero_u{0.0, 1.0};
  CHECK(evaluate_module(TermModule{{0, 1}}, jet) == doctest::Approx(6.0));
  CHECK(evaluate_module(TermModule{{0, 2, 2}}, u_uxx) == doctest::Approx(18.0));
  CHECK(evaluate_module(TermModule{{0}}, zero_u) == 0.0);
  CHECK_THROWS_AS(evaluate_module(TermModule{{5}}, jet), StructuralError);
  CHECK_THROWS_AS(evaluate_module(TermModule{{}}, jet), StructuralError);
}

TEST_CASE("build_system wires the target and design columns") {
  MetaDataset ds = random_jets(3, 1);
  Genome g = from_bracket("[1],{[1],[2]}");
  LinearSystem sys = build_system(g, ds);
  CHECK(sys.design.rows() == 3);
  CHECK(sys.design.cols() == 2);
  CHECK(sys.target == ds.jets.col(ds.temporal_col(1)));
  CHECK(sys.design.col(0) == ds.jets.col(ds.spatial_col(1)));
  CHECK(sys.design.col(1) == ds.jets.col(ds.spatial_col(2)));

  Genome wave = from_bracket("[2],{[2]}");
  LinearSystem wsys = build_system(wave, ds);
  CHECK(wsys.target == ds.jets.col(ds.temporal_col(2)));
}

TEST_CASE("a manufactured u_t = 2 u_x relation is solved exactly") {
  MetaDataset ds = random_jets(50, 2);
  ds.jets.col(ds.temporal_col(1)) = 2.0 * ds.jets.col(ds.spatial_col(1));
  LinearSystem sys = build_system(from_bracket("[1],{[1]}"), ds);
  FitResult fit = least_squares(sys);
  CHECK(fit.coeffs(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.mse < 1e-24);
  CHECK_FALSE(fit.condition_flag);
}

TEST_CASE("design columns match per-module evaluation on random genomes") {
  MetaDataset ds = random_jets(40, 3);
  GenePool pool;
  pool.max_genes_per_module = 3;
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Genome g = random_genome(pool, rng);
    LinearSystem sys = build_system(g, ds);
    for (std::size_t j = 0; j < g.modules.size(); ++j)
      for (Eigen::Index r = 0; r < ds.rows(); ++r) {
        std::vector<double> jet(5);
        for (int k = 0; k <= 4; ++k) jet[static_cast<std::size_t>(k)] = ds.jets(r, k);
        CHECK(sys.design(r, static_cast<Eigen::Index>(j)) ==
              doctest::Approx(evaluate_module(g.modules[j], jet)).epsilon(1e-14));
      }
  }
}

TEST_CASE("permuting meta rows permutes the system rows identically") {
  MetaDataset ds = random_jets(20, 4);
  Genome g = from_bracket("[1],{[0,1],[2]}");
  LinearSystem sys = build_system(g, ds);

  MetaDataset reversed = ds;
  reversed.jets = ds.jets.colwise().reverse().eval();
  LinearSystem rsys = build_system(g, reversed);
  CHECK(rsys.target == sys.target.reverse().eval());
  for (Eigen::Index j = 0; j < sys.design.cols(); ++j)
    CHECK(rsys.design.col(j) == sys.design.col(j).reverse().eval());
}

TEST_CASE("least squares on orthonormal columns picks out the target column") {
  const int n = 16;
  Eigen::MatrixXd q = Eigen::MatrixXd::Random(n, 3);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  Eigen::MatrixXd on = qr.householderQ() * Eigen::MatrixXd::Identity(n, 3);
  LinearSystem sys;
  sys.design = on;
  sys.target = on.col(0);
  FitResult fit = least_squares(sys);
  CHECK(fit.coeffs(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(fit.coeffs(1)) < 1e-12);
  CHECK(std::abs(fit.coeffs(2)) < 1e-12);
  CHECK(fit.mse < 1e-24);
}

TEST_CASE("a target orthogonal to the column space fits as zero") {
  const int n = 12;
  Eigen::MatrixXd q = Eigen::MatrixXd::Random(n, 4);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(n, 4);
  LinearSystem sys;
  sys.design = full.leftCols(3);
  sys.target = full.col(3);  // orthogonal to the design
  FitResult fit = least_squares(sys);
  CHECK(fit.coeffs.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.mse == doctest::Approx(sys.target.squaredNorm() / n).epsilon(1e-12));
}

TEST_CASE("manufactured 3*c1 - 2*c2 with small noise recovers the pair") {
  Rng rng(5);
  const int n = 300;
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    design(i, 0) = rng.uniform(-1, 1);
    design(i, 1) = rng.uniform(-1, 1);
    target(i) = 3.0 * design(i, 0) - 2.0 * design(i, 1) + 1e-6 * rng.uniform(-1, 1);
  }
  FitResult fit = least_squares({target, design});
  CHECK(fit.coeffs(0) == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(fit.coeffs(1) == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("the least-squares residual is orthogonal to the column space") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 40, m = 4;
    Eigen::MatrixXd design(n, m);
    Eigen::VectorXd target(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) design(i, j) = rng.uniform(-3, 3);
      target(i) = rng.uniform(-3, 3);
    }
    FitResult fit = least_squares({target, design});
    Eigen::VectorXd residual = target - design * fit.coeffs;
    Eigen::VectorXd proj = design.transpose() * residual;
    for (int j = 0; j < m; ++j)
      CHECK(std::abs(proj(j)) <= 1e-8 * target.norm() * design.col(j).norm());
  }
}

TEST_CASE("duplicate columns raise the condition flag") {
  MetaDataset ds = random_jets(30, 8);
  LinearSystem sys;
  sys.target = ds.jets.col(5);
  sys.design.resize(30, 2);
  sys.design.col(0) = ds.jets.col(0);
  sys.design.col(1) = ds.jets.col(0);  // exactly collinear
  FitResult fit = least_squares(sys);
  CHECK(fit.condition_flag);
}

TEST_CASE("underdetermined systems are structural errors") {
  LinearSystem sys;
  sys.design = Eigen::MatrixXd::Random(2, 3);
  sys.target = Eigen::VectorXd::Random(2);
  CHECK_THROWS_AS(least_squares(sys), StructuralError);
}

TEST_CASE("library construction matches the published term counts") {
  MetaDataset ds = random_jets(25, 9);
  FixedLibrary b12 = FixedLibrary::burgers12(ds);
  CHECK(b12.terms.size() == 12);
  CHECK(b12.columns.cols() == 12);
  CHECK(b12.terms[0].name() == "1");
  CHECK(b12.terms[1].name() == "u");
  CHECK(b12.terms[4].name() == "u*u_x");

  FixedLibrary c16 = FixedLibrary::chaffee16(ds);
  CHECK(c16.terms.size() == 16);
  CHECK(c16.terms[3].name() == "u*u*u");
  CHECK(c16.terms.back().name() == "u*u*u*u_xxx");

  // Column content: u^2 * u_x at each row.
  for (Eigen::Index r = 0; r < ds.rows(); ++r) {
    const double u = ds.jets(r, 0), ux = ds.jets(r, 1);
    CHECK(b12.columns(r, 5) == doctest::Approx(u * u * ux).epsilon(1e-14));
  }
}

TEST_CASE("stridge with zero threshold and lambda is plain least squares") {
  MetaDataset ds = random_jets(200, 10);
  FixedLibrary lib = FixedLibrary::burgers12(ds);
  Eigen::VectorXd target = ds.jets.col(ds.temporal_col(1));
  StridgeResult res = stridge(lib, target, 0.0, 0.0, 20);
  CHECK(res.support.size() == 12);

  LinearSystem sys{target, lib.columns};
  FitResult ls = least_squares(sys);
  for (int j = 0; j < 12; ++j)
    CHECK(res.fit.coeffs(j) == doctest::Approx(ls.coeffs(j)).epsilon(1e-8));
}

TEST_CASE("stridge recovers a planted sparse combination") {
  MetaDataset ds = random_jets(500, 11);
  FixedLibrary lib = FixedLibrary::burgers12(ds);
  Rng rng(12);
  // target = 3 * col4 - 2 * col6 + tiny noise
  Eigen::VectorXd target = 3.0 * lib.columns.col(4) - 2.0 * lib.columns.col(6);
  for (Eigen::Index i = 0; i < target.size(); ++i)
    target(i) += 1e-6 * rng.uniform(-1, 1);

  // Brute-force support oracle over all pairs: the planted pair wins.
  int best_i = -1, best_j = -1;
  double best_mse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j) {
      LinearSystem sys;
      sys.target = target;
      sys.design.resize(target.size(), 2);
      sys.design.col(0) = lib.columns.col(i);
      sys.design.col(1) = lib.columns.col(j);
      const double mse = least_squares(sys).mse;
      if (mse < best_mse) {
        best_mse = mse;
        best_i = i;
        best_j = j;
      }
    }
  REQUIRE(best_i == 4);
  REQUIRE(best_j == 6);

  StridgeResult res = stridge_sweep(lib, target, 1e-5 * 500,
                                    {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1}, 25,
                                    1e-4 * target.squaredNorm() / 500);
  CHECK(res.support == std::vector<int>{4, 6});
  CHECK(res.fit.coeffs(4) == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(res.fit.coeffs(6) == doctest::Approx(-2.0).epsilon(1e-3));
}

TEST_CASE("stridge support shrinks monotonically") {
  MetaDataset ds = random_jets(300, 13);
  FixedLibrary lib = FixedLibrary::chaffee16(ds);
  Eigen::VectorXd target = ds.jets.col(ds.temporal_col(1));
  StridgeResult res = stridge(lib, target, 1e-3, 0.05, 30);
  for (std::size_t i = 1; i < res.support_history.size(); ++i) {
    CHECK(res.support_history[i].size() <= res.support_history[i - 1].size());
    CHECK(std::includes(res.support_history[i - 1].begin(),
                        res.support_history[i - 1].end(),
                        res.support_history[i].begin(),
                        res.support_history[i].end()));
  }
}

TEST_CASE("an overwhelming threshold empties the support") {
  MetaDataset ds = random_jets(200, 14);
  FixedLibrary lib = FixedLibrary::burgers12(ds);
  Eigen::VectorXd target = ds.jets.col(ds.temporal_col(1));

  StridgeResult ols = stridge(lib, target, 0.0, 0.0, 1);
  Eigen::VectorXd normalized_mag(12);
  for (int j = 0; j < 12; ++j)
    normalized_mag(j) =
        std::abs(ols.fit.coeffs(j)) * lib.columns.col(j).norm() / target.norm();
  const double above = normalized_mag.maxCoeff() * 1.5;

  StridgeResult res = stridge(lib, target, 0.0, above, 20);
  CHECK(res.support.empty());
  CHECK(res.fit.mse == doctest::Approx(target.squaredNorm() / 200));
  CHECK(res.fit.coeffs.cwiseAbs().maxCoeff() == 0.0);
}
