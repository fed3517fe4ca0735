#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace evopde {

enum class ProblemKind { kKdv, kBurgers, kWave, kChaffeeInfante };

std::string to_string(ProblemKind k);
ProblemKind problem_kind_from_string(const std::string& name);

/// Grid and physics parameters for one reference problem. Defaults per
/// kind come from defaults(); every field can be overridden for small
/// test-scale runs.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::kKdv;

  // Physical coefficients (each kind reads the one it owns).
  double b = 0.0025;              // kdv third-derivative coefficient
  double a = 0.1;                 // burgers diffusion
  double wave_speed_sq = 1.0;     // wave equation A
  double lambda = 1.0;            // chaffee-infante reaction strength
  double dispersion_sign = -1.0;  // kdv: u_t = -u u_x + sign*b*u_xxx

  // Spectral problems (kdv, burgers): periodic on [x_min, x_max).
  int modes = 512;
  double x_min = -1.0;
  double x_max = 1.0;
  double inner_dt = 1e-6;
  double record_dt = 0.005;
  double t_end = 1.0;

  // Finite-difference problems (wave, chaffee-infante) on [0, x_f].
  int space_nodes = 160;   // M; dx = x_f / M
  int time_nodes = 320;    // N; dt = t_f / N
  double x_f = 3.141592653589793;
  double t_f = 6.283185307179586;
  int record_every = 1;       // frames every this many inner steps
  double record_start = 0.0;  // first recorded time

  std::uint64_t seed = 0;  // reserved; the integrators are deterministic

  static ProblemSpec defaults(ProblemKind k);

  /// Stability checks: wave needs A*dt^2/dx^2 <= 1, chaffee-infante needs
  /// dt/dx^2 <= 1/2, spectral kinds need a power-of-two mode count.
  void validate() const;
};

/// Solution samples on a space-time grid, u[i][j] = u(x_i, t_j).
struct Field {
  std::vector<double> x_nodes;
  std::vector<double> t_nodes;
  Eigen::MatrixXd values;  // (x_nodes.size(), t_nodes.size())

  std::size_t point_count() const { return x_nodes.size() * t_nodes.size(); }
  void validate() const;  // finite values, strictly increasing axes
};

Field solve_reference_problem(const ProblemSpec& spec);

/// Same scheme with the inner time step divided by `factor`, recorded on
/// the identical grid; the wave solver also refines dx to keep its
/// stability ratio fixed and subsamples back. Grid-refinement oracle for
/// the tests.
Field solve_refined(const ProblemSpec& spec, int factor);

/// Multiplicative noise u * (1 + delta * e), e iid uniform on [-1, 1].
Field add_noise(const Field& field, double delta, std::uint64_t seed);

struct Sample {
  double x, t, u;
};

/// Uniform sampling without replacement from the full grid.
std::vector<Sample> sample_training_data(const Field& field, std::size_t n,
                                         std::uint64_t seed);

// Columnar persistence: header (kind, coefficients, axes) + row-major
// payload, plus a CSV export for inspection.
void save_field(const Field& field, const ProblemSpec& spec,
                const std::string& path);
Field load_field(const std::string& path, ProblemSpec* spec_out = nullptr);
void export_field_csv(const Field& field, const std::string& path);

}  // namespace evopde
