#include "evopde/solvers.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "evopde/errors.hpp"
#include "evopde/fft.hpp"
#include "evopde/rng.hpp"

namespace evopde {

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::kKdv: return "kdv";
    case ProblemKind::kBurgers: return "burgers";
    case ProblemKind::kWave: return "wave";
    case ProblemKind::kChaffeeInfante: return "chaffee_infante";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "kdv") return ProblemKind::kKdv;
  if (name == "burgers") return ProblemKind::kBurgers;
  if (name == "wave") return ProblemKind::kWave;
  if (name == "chaffee_infante" || name == "chaffee")
    return ProblemKind::kChaffeeInfante;
  throw ConfigError("unknown problem kind '" + name + "'");
}

ProblemSpec ProblemSpec::defaults(ProblemKind k) {
  ProblemSpec s;
  s.kind = k;
  switch (k) {
    case ProblemKind::kKdv:
      // 512 x 201 observations on [-1,1) x [0,1].
      s.modes = 512;
      s.x_min = -1.0;
      s.x_max = 1.0;
      s.inner_dt = 1e-6;
      s.record_dt = 0.005;
      s.t_end = 1.0;
      s.b = 0.0025;
      s.dispersion_sign = -1.0;
      break;
    case ProblemKind::kBurgers:
      // 256 x 201 observations on [-8,8) x [0,10].
      s.modes = 256;
      s.x_min = -8.0;
      s.x_max = 8.0;
      s.inner_dt = 1e-4;
      s.record_dt = 0.05;
      s.t_end = 10.0;
      s.a = 0.1;
      break;
    case ProblemKind::kWave:
      // 161 x 321 observations on [0,pi] x [0,2pi], every step recorded.
      s.space_nodes = 160;
      s.time_nodes = 320;
      s.x_f = std::numbers::pi;
      s.t_f = 2.0 * std::numbers::pi;
      s.record_every = 1;
      s.record_start = 0.0;
      s.wave_speed_sq = 1.0;
      break;
    case ProblemKind::kChaffeeInfante:
      // 301 x 200 observations: frames every 320 inner steps from t=0.1.
      s.space_nodes = 300;
      s.time_nodes = 80000;
      s.x_f = 3.0;
      s.t_f = 0.5;
      s.record_every = 320;
      s.record_start = 0.1;
      s.lambda = 1.0;
      break;
  }
  return s;
}

void ProblemSpec::validate() const {
  switch (kind) {
    case ProblemKind::kKdv:
    case ProblemKind::kBurgers: {
      if (modes < 2 || (modes & (modes - 1)) != 0)
        throw ConfigError("spectral problems need a power-of-two mode count");
      if (!(x_max > x_min) || inner_dt <= 0 || record_dt <= 0 || t_end <= 0)
        throw ConfigError("bad spectral grid parameters");
      break;
    }
    case ProblemKind::kWave: {
      const double dx = x_f / space_nodes;
      const double dt = t_f / time_nodes;
      const double r = wave_speed_sq * dt * dt / (dx * dx);
      if (r > 1.0 + 1e-12)
        throw ConfigError("wave stability violated: A*dt^2/dx^2 = " +
                          std::to_string(r) + " > 1");
      break;
    }
    case ProblemKind::kChaffeeInfante: {
      const double dx = x_f / space_nodes;
      const double dt = t_f / time_nodes;
      const double r = dt / (dx * dx);
      if (r > 0.5 + 1e-12)
        throw ConfigError("chaffee-infante stability violated: dt/dx^2 = " +
                          std::to_string(r) + " > 1/2");
      break;
    }
  }
  if (space_nodes < 3 || time_nodes < 2)
    throw ConfigError("finite-difference grid too small");
}

void Field::validate() const {
  if (x_nodes.empty() || t_nodes.empty())
    throw StructuralError("field has an empty axis");
  if (values.rows() != static_cast<Eigen::Index>(x_nodes.size()) ||
      values.cols() != static_cast<Eigen::Index>(t_nodes.size()))
    throw StructuralError("field value matrix does not match axes");
  for (std::size_t i = 1; i < x_nodes.size(); ++i)
    if (!(x_nodes[i] > x_nodes[i - 1]))
      throw StructuralError("x_nodes not strictly increasing");
  for (std::size_t j = 1; j < t_nodes.size(); ++j)
    if (!(t_nodes[j] > t_nodes[j - 1]))
      throw StructuralError("t_nodes not strictly increasing");
  if (!values.allFinite()) throw StructuralError("field contains non-finite values");
}

namespace {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

// Spectral right-hand side for kdv/burgers, conservative form:
// u_t = -(u^2/2)_x + linear term. State lives in Fourier space.
class SpectralRhs {
 public:
  SpectralRhs(const ProblemSpec& spec, const Fft& fft)
      : spec_(spec), fft_(fft), n_(fft.size()), buf_(n_), sq_(n_) {
    const double length = spec.x_max - spec.x_min;
    k_.resize(n_);
    k_odd_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      const int idx = j <= n_ / 2 ? j : j - n_;
      k_[j] = 2.0 * std::numbers::pi / length * idx;
      k_odd_[j] = k_[j];
    }
    k_odd_[n_ / 2] = 0.0;  // odd derivatives drop the Nyquist mode
  }

  void operator()(const CVec& u_hat, CVec& out) {
    buf_ = u_hat;
    fft_.inverse(buf_.data());
    for (int j = 0; j < n_; ++j) {
      const double u = buf_[j].real();
      sq_[j] = Complex(u * u, 0.0);
    }
    fft_.forward(sq_.data());
    if (spec_.kind == ProblemKind::kKdv) {
      const double bc = spec_.dispersion_sign * spec_.b;
      for (int j = 0; j < n_; ++j) {
        const double k = k_odd_[j];
        // -(ik/2) fft(u^2) + sign*b*(ik)^3 u_hat
        out[j] = Complex(0.0, -0.5 * k) * sq_[j] +
                 Complex(0.0, -bc * k * k * k) * u_hat[j];
      }
    } else {
      for (int j = 0; j < n_; ++j) {
        const double kd = k_odd_[j], k = k_[j];
        out[j] = Complex(0.0, -0.5 * kd) * sq_[j] - spec_.a * k * k * u_hat[j];
      }
    }
  }

 private:
  const ProblemSpec& spec_;
  const Fft& fft_;
  int n_;
  std::vector<double> k_, k_odd_;
  CVec buf_, sq_;
};

Field solve_spectral(const ProblemSpec& spec, int refine) {
  const int n = spec.modes;
  const double length = spec.x_max - spec.x_min;
  const double dt = spec.inner_dt / refine;
  const long steps_per_record = std::lround(spec.record_dt / dt);
  const long n_records = std::lround(spec.t_end / spec.record_dt) + 1;

  Field field;
  field.x_nodes.resize(n);
  for (int i = 0; i < n; ++i) field.x_nodes[i] = spec.x_min + length * i / n;
  field.t_nodes.resize(n_records);
  for (long r = 0; r < n_records; ++r) field.t_nodes[r] = spec.record_dt * r;
  field.values.resize(n, n_records);

  Fft fft(n);
  CVec u_hat(n);
  for (int i = 0; i < n; ++i) {
    const double x = field.x_nodes[i];
    const double u0 = spec.kind == ProblemKind::kKdv
                          ? std::cos(std::numbers::pi * x)
                          : -std::sin(std::numbers::pi * x / 8.0);
    u_hat[i] = Complex(u0, 0.0);
    field.values(i, 0) = u0;
  }
  fft.forward(u_hat.data());

  SpectralRhs rhs(spec, fft);
  CVec k1(n), k2(n), k3(n), k4(n), tmp(n), phys(n);

  long step = 0;
  for (long rec = 1; rec < n_records; ++rec) {
    for (long s = 0; s < steps_per_record; ++s, ++step) {
      rhs(u_hat, k1);
      for (int j = 0; j < n; ++j) tmp[j] = u_hat[j] + 0.5 * dt * k1[j];
      rhs(tmp, k2);
      for (int j = 0; j < n; ++j) tmp[j] = u_hat[j] + 0.5 * dt * k2[j];
      rhs(tmp, k3);
      for (int j = 0; j < n; ++j) tmp[j] = u_hat[j] + dt * k3[j];
      rhs(tmp, k4);
      const double w = dt / 6.0;
      for (int j = 0; j < n; ++j)
        u_hat[j] += w * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    phys = u_hat;
    fft.inverse(phys.data());
    for (int i = 0; i < n; ++i) {
      const double v = phys[i].real();
      if (!std::isfinite(v))
        throw DivergenceError(to_string(spec.kind) + " integration diverged", step);
      field.values(i, rec) = v;
    }
  }
  return field;
}

double wave_initial(double x) {
  return x < std::numbers::pi / 2.0 ? 0.5 * std::sin(2.0 * x) : 0.0;
}

Field solve_wave(const ProblemSpec& spec, int refine) {
  const int m = spec.space_nodes * refine;
  const long n_steps = static_cast<long>(spec.time_nodes) * refine;
  const double dx = spec.x_f / m;
  const double dt = spec.t_f / n_steps;
  const double r = spec.wave_speed_sq * dt * dt / (dx * dx);

  Field field;
  field.x_nodes.resize(spec.space_nodes + 1);
  for (int i = 0; i <= spec.space_nodes; ++i)
    field.x_nodes[i] = spec.x_f * i / spec.space_nodes;
  field.t_nodes.resize(spec.time_nodes + 1);
  for (int j = 0; j <= spec.time_nodes; ++j)
    field.t_nodes[j] = spec.t_f * j / spec.time_nodes;
  field.values.resize(spec.space_nodes + 1, spec.time_nodes + 1);

  std::vector<double> prev(m + 1), curr(m + 1), next(m + 1);
  for (int i = 0; i <= m; ++i) prev[i] = wave_initial(spec.x_f * i / m);

  auto record = [&](const std::vector<double>& u, long rec, long step) {
    for (int i = 0; i <= spec.space_nodes; ++i) {
      const double v = u[static_cast<std::size_t>(i) * refine];
      if (!std::isfinite(v)) throw DivergenceError("wave integration diverged", step);
      field.values(i, rec) = v;
    }
  };
  record(prev, 0, 0);

  // Second-order start from zero initial velocity.
  curr[0] = curr[m] = 0.0;
  for (int i = 1; i < m; ++i)
    curr[i] = prev[i] + 0.5 * r * (prev[i - 1] - 2.0 * prev[i] + prev[i + 1]);
  if (1 % refine == 0) record(curr, 1 / refine, 1);

  for (long step = 2; step <= n_steps; ++step) {
    next[0] = next[m] = 0.0;
    for (int i = 1; i < m; ++i)
      next[i] = r * (curr[i - 1] + curr[i + 1]) + (2.0 - 2.0 * r) * curr[i] - prev[i];
    prev.swap(curr);
    curr.swap(next);
    if (step % refine == 0) record(curr, step / refine, step);
  }
  return field;
}

Field solve_chaffee(const ProblemSpec& spec, int refine) {
  const int m = spec.space_nodes;
  const long n_steps = static_cast<long>(spec.time_nodes) * refine;
  const double dx = spec.x_f / m;
  const double dt = spec.t_f / n_steps;
  const double r = dt / (dx * dx);
  const long record_every = static_cast<long>(spec.record_every) * refine;
  const long first_step = std::lround(spec.record_start / dt);
  const long n_records = (n_steps - first_step) / record_every;

  Field field;
  field.x_nodes.resize(m + 1);
  for (int i = 0; i <= m; ++i) field.x_nodes[i] = spec.x_f * i / m;
  field.t_nodes.resize(n_records);
  field.values.resize(m + 1, n_records);

  std::vector<double> u(m + 1), next(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double x = field.x_nodes[i];
    u[i] = x * std::sin(x);
  }

  long rec = 0;
  for (long step = 0; step <= n_steps; ++step) {
    if (step >= first_step && (step - first_step) % record_every == 0 &&
        rec < n_records) {
      field.t_nodes[rec] = step * dt;
      for (int i = 0; i <= m; ++i) {
        if (!std::isfinite(u[i]))
          throw DivergenceError("chaffee-infante integration diverged", step);
        field.values(i, rec) = u[i];
      }
      ++rec;
    }
    if (step == n_steps) break;
    next[0] = next[m] = 0.0;
    for (int i = 1; i < m; ++i) {
      const double ui = u[i];
      next[i] = (1.0 - 2.0 * r) * ui + r * (u[i - 1] + u[i + 1]) +
                spec.lambda * (ui * ui * ui - ui) * dt;
    }
    u.swap(next);
  }
  return field;
}

}  // namespace

Field solve_refined(const ProblemSpec& spec, int factor) {
  spec.validate();
  Field f;
  switch (spec.kind) {
    case ProblemKind::kKdv:
    case ProblemKind::kBurgers:
      f = solve_spectral(spec, factor);
      break;
    case ProblemKind::kWave:
      f = solve_wave(spec, factor);
      break;
    case ProblemKind::kChaffeeInfante:
      f = solve_chaffee(spec, factor);
      break;
  }
  f.validate();
  return f;
}

Field solve_reference_problem(const ProblemSpec& spec) {
  return solve_refined(spec, 1);
}

Field add_noise(const Field& field, double delta, std::uint64_t seed) {
  if (delta < 0) throw ConfigError("noise level must be >= 0");
  Field out = field;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < out.values.rows(); ++i)
    for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
      const double e = rng.uniform(-1.0, 1.0);
      out.values(i, j) = field.values(i, j) * (1.0 + delta * e);
    }
  return out;
}

std::vector<Sample> sample_training_data(const Field& field, std::size_t n,
                                         std::uint64_t seed) {
  const std::size_t total = field.point_count();
  if (n < 1 || n > total)
    throw StructuralError("sample count " + std::to_string(n) +
                          " outside [1, " + std::to_string(total) + "]");
  const std::size_t nt = field.t_nodes.size();

  std::vector<std::uint32_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = static_cast<std::uint32_t>(i);
  Rng rng(seed);
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = k + rng.below(total - k);
    std::swap(idx[k], idx[j]);
    const std::size_t i = idx[k] / nt;
    const std::size_t t = idx[k] % nt;
    out.push_back({field.x_nodes[i], field.t_nodes[t],
                   field.values(static_cast<Eigen::Index>(i),
                                static_cast<Eigen::Index>(t))});
  }
  return out;
}

namespace {

constexpr char kFieldMagic[8] = {'E', 'V', 'P', 'F', '0', '1', '\n', '\0'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto n = read_pod<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

std::vector<std::pair<std::string, double>> header_coeffs(const ProblemSpec& s) {
  switch (s.kind) {
    case ProblemKind::kKdv:
      return {{"b", s.b}, {"dispersion_sign", s.dispersion_sign}};
    case ProblemKind::kBurgers:
      return {{"a", s.a}};
    case ProblemKind::kWave:
      return {{"A", s.wave_speed_sq}};
    case ProblemKind::kChaffeeInfante:
      return {{"lambda", s.lambda}};
  }
  return {};
}

}  // namespace

void save_field(const Field& field, const ProblemSpec& spec,
                const std::string& path) {
  field.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os.write(kFieldMagic, sizeof(kFieldMagic));
  write_string(os, to_string(spec.kind));
  const auto coeffs = header_coeffs(spec);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(coeffs.size()));
  for (const auto& [name, value] : coeffs) {
    write_string(os, name);
    write_pod<double>(os, value);
  }
  write_pod<std::uint64_t>(os, field.x_nodes.size());
  write_pod<std::uint64_t>(os, field.t_nodes.size());
  os.write(reinterpret_cast<const char*>(field.x_nodes.data()),
           static_cast<std::streamsize>(field.x_nodes.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(field.t_nodes.data()),
           static_cast<std::streamsize>(field.t_nodes.size() * sizeof(double)));
  // Row-major payload: one row per x node.
  for (Eigen::Index i = 0; i < field.values.rows(); ++i)
    for (Eigen::Index j = 0; j < field.values.cols(); ++j)
      write_pod<double>(os, field.values(i, j));
  if (!os) throw Error("failed writing field to '" + path + "'");
}

Field load_field(const std::string& path, ProblemSpec* spec_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open field file '" + path + "'");
  char magic[sizeof(kFieldMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::string(magic, sizeof(magic)) != std::string(kFieldMagic, sizeof(kFieldMagic)))
    throw StructuralError("'" + path + "' is not a field file");
  const std::string kind = read_string(is);
  const auto n_coeffs = read_pod<std::uint32_t>(is);
  std::vector<std::pair<std::string, double>> coeffs(n_coeffs);
  for (auto& [name, value] : coeffs) {
    name = read_string(is);
    value = read_pod<double>(is);
  }
  if (spec_out) {
    *spec_out = ProblemSpec::defaults(problem_kind_from_string(kind));
    for (const auto& [name, value] : coeffs) {
      if (name == "b") spec_out->b = value;
      if (name == "dispersion_sign") spec_out->dispersion_sign = value;
      if (name == "a") spec_out->a = value;
      if (name == "A") spec_out->wave_speed_sq = value;
      if (name == "lambda") spec_out->lambda = value;
    }
  }
  Field f;
  const auto nx = read_pod<std::uint64_t>(is);
  const auto nt = read_pod<std::uint64_t>(is);
  if (!is || nx == 0 || nt == 0 || nx > (1u << 24) || nt > (1u << 24))
    throw StructuralError("corrupt field header in '" + path + "'");
  f.x_nodes.resize(nx);
  f.t_nodes.resize(nt);
  is.read(reinterpret_cast<char*>(f.x_nodes.data()),
          static_cast<std::streamsize>(nx * sizeof(double)));
  is.read(reinterpret_cast<char*>(f.t_nodes.data()),
          static_cast<std::streamsize>(nt * sizeof(double)));
  f.values.resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nt));
  for (std::uint64_t i = 0; i < nx; ++i)
    for (std::uint64_t j = 0; j < nt; ++j)
      f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          read_pod<double>(is);
  if (!is) throw StructuralError("truncated field file '" + path + "'");
  f.validate();
  return f;
}

void export_field_csv(const Field& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << "x,t,u\n";
  char buf[96];
  for (Eigen::Index i = 0; i < field.values.rows(); ++i)
    for (Eigen::Index j = 0; j < field.values.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n",
                    field.x_nodes[static_cast<std::size_t>(i)],
                    field.t_nodes[static_cast<std::size_t>(j)], field.values(i, j));
      os << buf;
    }
}

}  // namespace evopde
