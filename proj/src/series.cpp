#include "evopde/series.hpp"

#include <cmath>

#include "evopde/errors.hpp"

namespace evopde {

namespace series_kernel {

void mul(const double* a, const double* b, double* out, int n) {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= i; ++j) acc += a[j] * b[i - j];
    out[i] = acc;
  }
}

void sin_cos(const double* a, double* s, double* c, int n) {
  s[0] = std::sin(a[0]);
  c[0] = std::cos(a[0]);
  for (int i = 1; i < n; ++i) {
    double ds = 0.0, dc = 0.0;
    for (int k = 1; k <= i; ++k) {
      ds += k * a[k] * c[i - k];
      dc += k * a[k] * s[i - k];
    }
    s[i] = ds / i;
    c[i] = -dc / i;
  }
}

void tanh(const double* a, double* t, double* w, int n) {
  t[0] = std::tanh(a[0]);
  w[0] = 1.0 - t[0] * t[0];
  for (int i = 1; i < n; ++i) {
    double dt = 0.0;
    for (int k = 1; k <= i; ++k) dt += k * a[k] * w[i - k];
    t[i] = dt / i;
    double ww = 0.0;
    for (int j = 0; j <= i; ++j) ww += t[j] * t[i - j];
    w[i] = -ww;
  }
}

}  // namespace series_kernel

TruncatedSeries::TruncatedSeries(int degree) {
  if (degree < 0) throw StructuralError("series degree must be >= 0");
  coeffs_.assign(static_cast<std::size_t>(degree) + 1, 0.0);
}

TruncatedSeries::TruncatedSeries(std::vector<double> coeffs)
    : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw StructuralError("series needs at least one coefficient");
}

TruncatedSeries TruncatedSeries::constant(double v, int degree) {
  TruncatedSeries s(degree);
  s.coeffs_[0] = v;
  return s;
}

TruncatedSeries TruncatedSeries::identity(double v, int degree) {
  TruncatedSeries s(degree);
  s.coeffs_[0] = v;
  if (degree >= 1) s.coeffs_[1] = 1.0;
  return s;
}

void TruncatedSeries::require_same_degree(const TruncatedSeries& rhs) const {
  if (coeffs_.size() != rhs.coeffs_.size())
    throw StructuralError("series degree mismatch");
}

TruncatedSeries TruncatedSeries::operator+(const TruncatedSeries& rhs) const {
  require_same_degree(rhs);
  TruncatedSeries out(degree());
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    out.coeffs_[i] = coeffs_[i] + rhs.coeffs_[i];
  return out;
}

TruncatedSeries TruncatedSeries::operator-(const TruncatedSeries& rhs) const {
  require_same_degree(rhs);
  TruncatedSeries out(degree());
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    out.coeffs_[i] = coeffs_[i] - rhs.coeffs_[i];
  return out;
}

TruncatedSeries TruncatedSeries::operator*(const TruncatedSeries& rhs) const {
  require_same_degree(rhs);
  TruncatedSeries out(degree());
  series_kernel::mul(coeffs_.data(), rhs.coeffs_.data(), out.coeffs_.data(),
                     static_cast<int>(coeffs_.size()));
  return out;
}

TruncatedSeries TruncatedSeries::scaled(double c) const {
  TruncatedSeries out(degree());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out.coeffs_[i] = c * coeffs_[i];
  return out;
}

TruncatedSeries sin(const TruncatedSeries& a) { return sin_cos(a).first; }

TruncatedSeries tanh(const TruncatedSeries& a) {
  const int n = a.degree() + 1;
  TruncatedSeries t(a.degree());
  std::vector<double> w(static_cast<std::size_t>(n));
  series_kernel::tanh(a.coeffs().data(), &t[0], w.data(), n);
  return t;
}

std::pair<TruncatedSeries, TruncatedSeries> sin_cos(const TruncatedSeries& a) {
  TruncatedSeries s(a.degree()), c(a.degree());
  series_kernel::sin_cos(a.coeffs().data(), &s[0], &c[0], a.degree() + 1);
  return {s, c};
}

}  // namespace evopde
