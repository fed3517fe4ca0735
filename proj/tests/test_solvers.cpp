#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "evopde/errors.hpp"
#include "evopde/solvers.hpp"

using namespace evopde;

TEST_CASE("wave field vanishes on both boundaries at all recorded times") {
  auto spec = ProblemSpec::defaults(ProblemKind::kWave);
  Field f = solve_reference_problem(spec);
  REQUIRE(f.x_nodes.size() == 161);
  REQUIRE(f.t_nodes.size() == 321);
  CHECK(f.point_count() == 51681);
  for (Eigen::Index j = 1; j < f.values.cols(); ++j) {
    CHECK(f.values(0, j) == 0.0);
    CHECK(f.values(f.values.rows() - 1, j) == 0.0);
  }
}

TEST_CASE("wave solver conserves the discrete energy to within 1%") {
  auto spec = ProblemSpec::defaults(ProblemKind::kWave);
  Field f = solve_reference_problem(spec);
  const double dt = f.t_nodes[1] - f.t_nodes[0];
  const double dx = f.x_nodes[1] - f.x_nodes[0];
  const double a2 = spec.wave_speed_sq;
  // Leapfrog-conserved quadratic form at half steps:
  // E = (1/2)|du/dt|^2 + (A/2) <D+ u^{n+1}, D+ u^n> / dx^2.
  auto energy = [&](Eigen::Index n) {
    double kinetic = 0.0, potential = 0.0;
    for (Eigen::Index i = 0; i < f.values.rows(); ++i) {
      const double v = (f.values(i, n + 1) - f.values(i, n)) / dt;
      kinetic += v * v;
    }
    for (Eigen::Index i = 0; i + 1 < f.values.rows(); ++i) {
      const double d0 = f.values(i + 1, n) - f.values(i, n);
      const double d1 = f.values(i + 1, n + 1) - f.values(i, n + 1);
      potential += d1 * d0 / (dx * dx);
    }
    return 0.5 * kinetic + 0.5 * a2 * potential;
  };
  const double e0 = energy(0);
  REQUIRE(e0 > 0.0);
  double max_drift = 0.0;
  for (Eigen::Index n = 0; n + 1 < f.values.cols(); ++n)
    max_drift = std::max(max_drift, std::abs(energy(n) - e0) / e0);
  CHECK(max_drift < 0.01);
}

TEST_CASE("chaffee-infante grid matches the reference observation layout") {
  auto spec = ProblemSpec::defaults(ProblemKind::kChaffeeInfante);
  Field f = solve_reference_problem(spec);
  REQUIRE(f.x_nodes.size() == 301);
  REQUIRE(f.t_nodes.size() == 200);
  CHECK(f.point_count() == 60200);
  CHECK(f.t_nodes.front() == doctest::Approx(0.1));
  CHECK(f.t_nodes[1] - f.t_nodes[0] == doctest::Approx(0.002));
  CHECK(f.x_nodes[1] - f.x_nodes[0] == doctest::Approx(0.01));
}

TEST_CASE("each solver agrees with its refined-step twin") {
  // Reduced spans keep the oracle fast; the schemes and their paper-scale
  // settings are unchanged apart from the horizon.
  SUBCASE("kdv") {
    auto spec = ProblemSpec::defaults(ProblemKind::kKdv);
    spec.modes = 128;
    spec.inner_dt = 2e-5;
    spec.t_end = 0.25;
    Field base = solve_reference_problem(spec);
    Field fine = solve_refined(spec, 4);
    CHECK((base.values - fine.values).cwiseAbs().maxCoeff() <= 1e-3);
  }
  SUBCASE("burgers") {
    auto spec = ProblemSpec::defaults(ProblemKind::kBurgers);
    spec.t_end = 1.0;
    Field base = solve_reference_problem(spec);
    Field fine = solve_refined(spec, 4);
    CHECK((base.values - fine.values).cwiseAbs().maxCoeff() <= 1e-3);
  }
  SUBCASE("wave") {
    auto spec = ProblemSpec::defaults(ProblemKind::kWave);
    Field base = solve_reference_problem(spec);
    Field fine = solve_refined(spec, 4);
    CHECK((base.values - fine.values).cwiseAbs().maxCoeff() <= 1e-3);
  }
  SUBCASE("chaffee") {
    auto spec = ProblemSpec::defaults(ProblemKind::kChaffeeInfante);
    Field base = solve_reference_problem(spec);
    Field fine = solve_refined(spec, 4);
    CHECK((base.values - fine.values).cwiseAbs().maxCoeff() <= 1e-3);
  }
}

TEST_CASE("stability violations are configuration errors") {
  auto wave = ProblemSpec::defaults(ProblemKind::kWave);
  wave.time_nodes = 200;  // r > 1
  CHECK_THROWS_AS(wave.validate(), ConfigError);

  auto chaffee = ProblemSpec::defaults(ProblemKind::kChaffeeInfante);
  chaffee.time_nodes = 8000;  // r > 1/2
  CHECK_THROWS_AS(chaffee.validate(), ConfigError);

  auto kdv = ProblemSpec::defaults(ProblemKind::kKdv);
  kdv.modes = 500;  // not a power of two
  CHECK_THROWS_AS(kdv.validate(), ConfigError);
}

TEST_CASE("add_noise with delta zero is the identity") {
  auto spec = ProblemSpec::defaults(ProblemKind::kWave);
  Field f = solve_reference_problem(spec);
  Field noisy = add_noise(f, 0.0, 99);
  CHECK(noisy.values == f.values);
}

TEST_CASE("add_noise stays inside the multiplicative band") {
  auto spec = ProblemSpec::defaults(ProblemKind::kChaffeeInfante);
  Field f = solve_reference_problem(spec);
  const double delta = 0.05;
  Field noisy = add_noise(f, delta, 1234);
  for (Eigen::Index i = 0; i < f.values.rows(); ++i)
    for (Eigen::Index j = 0; j < f.values.cols(); ++j) {
      const double lo = f.values(i, j) - delta * std::abs(f.values(i, j));
      const double hi = f.values(i, j) + delta * std::abs(f.values(i, j));
      CHECK(noisy.values(i, j) >= lo - 1e-15);
      CHECK(noisy.values(i, j) <= hi + 1e-15);
    }
}

TEST_CASE("add_noise is deterministic per seed") {
  auto spec = ProblemSpec::defaults(ProblemKind::kWave);
  Field f = solve_reference_problem(spec);
  Field a = add_noise(f, 0.1, 42);
  Field b = add_noise(f, 0.1, 42);
  CHECK(a.values == b.values);
  Field c = add_noise(f, 0.1, 43);
  CHECK(a.values != c.values);
}

TEST_CASE("sampling the whole grid yields a permutation") {
  auto spec = ProblemSpec::defaults(ProblemKind::kWave);
  spec.space_nodes = 16;
  spec.time_nodes = 32;
  Field f = solve_reference_problem(spec);
  auto samples = sample_training_data(f, f.point_count(), 7);
  CHECK(samples.size() == f.point_count());
  std::set<std::pair<double, double>> seen;
  for (const auto& s : samples) seen.insert({s.x, s.t});
  CHECK(seen.size() == f.point_count());
}

TEST_CASE("sampling a single point returns a valid grid point") {
  auto spec = ProblemSpec::defaults(ProblemKind::kWave);
  Field f = solve_reference_problem(spec);
  auto samples = sample_training_data(f, 1, 3);
  REQUIRE(samples.size() == 1);
  bool found = false;
  for (std::size_t i = 0; i < f.x_nodes.size() && !found; ++i)
    if (f.x_nodes[i] == samples[0].x) found = true;
  CHECK(found);
}

TEST_CASE("sample counts outside the grid are structural errors") {
  auto spec = ProblemSpec::defaults(ProblemKind::kWave);
  Field f = solve_reference_problem(spec);
  CHECK_THROWS_AS(sample_training_data(f, 0, 1), StructuralError);
  CHECK_THROWS_AS(sample_training_data(f, f.point_count() + 1, 1), StructuralError);
}

TEST_CASE("chaffee 10000-sample draw covers 16.6% of the grid") {
  auto spec = ProblemSpec::defaults(ProblemKind::kChaffeeInfante);
  Field f = solve_reference_problem(spec);
  auto samples = sample_training_data(f, 10000, 5);
  CHECK(static_cast<double>(samples.size()) / f.point_count() ==
        doctest::Approx(0.166).epsilon(0.01));
}

TEST_CASE("sampling is uniform across cells over many seeds") {
  auto spec = ProblemSpec::defaults(ProblemKind::kWave);
  spec.space_nodes = 19;  // 20 x 41 = 820 cells
  spec.time_nodes = 40;
  Field f = solve_reference_problem(spec);
  const std::size_t cells = f.point_count();
  const std::size_t n = 82;
  const int seeds = 2000;
  std::vector<int> counts(cells, 0);
  for (int s = 0; s < seeds; ++s) {
    auto samples = sample_training_data(f, n, 1000 + s);
    for (const auto& smp : samples) {
      std::size_t ix = 0, it = 0;
      while (f.x_nodes[ix] != smp.x) ++ix;
      while (f.t_nodes[it] != smp.t) ++it;
      counts[ix * f.t_nodes.size() + it] += 1;
    }
  }
  const double p = static_cast<double>(n) / cells;
  const double mean = seeds * p;
  const double sigma = std::sqrt(seeds * p * (1 - p));
  int outside_3sigma = 0;
  for (int c : counts)
    if (std::abs(c - mean) > 3 * sigma) ++outside_3sigma;
  // Binomial tails put ~0.27% of cells outside 3 sigma; allow 1%.
  CHECK(outside_3sigma <= static_cast<int>(cells / 100));
}

TEST_CASE("field round trips through the binary format bit-exactly") {
  auto spec = ProblemSpec::defaults(ProblemKind::kChaffeeInfante);
  Field f = solve_reference_problem(spec);
  const auto dir = std::filesystem::temp_directory_path() / "evopde_test_io";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "field.bin").string();
  save_field(f, spec, path);
  ProblemSpec loaded_spec;
  Field g = load_field(path, &loaded_spec);
  CHECK(g.values == f.values);
  CHECK(g.x_nodes == f.x_nodes);
  CHECK(g.t_nodes == f.t_nodes);
  CHECK(loaded_spec.kind == ProblemKind::kChaffeeInfante);
  CHECK(loaded_spec.lambda == spec.lambda);

  const std::string csv = (dir / "field.csv").string();
  export_field_csv(f, csv);
  CHECK(std::filesystem::file_size(csv) > 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("loading a non-field file fails cleanly") {
  const auto dir = std::filesystem::temp_directory_path() / "evopde_test_io2";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "not_a_field.bin").string();
  {
    std::ofstream os(path);
    os << "garbage";
  }
  CHECK_THROWS_AS(load_field(path), Error);
  std::filesystem::remove_all(dir);
}
