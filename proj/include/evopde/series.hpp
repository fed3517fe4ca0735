#pragma once

#include <utility>
#include <vector>

namespace evopde {

// Raw kernels over coefficient buffers. n = degree + 1. The network jet
// propagation runs these on preallocated slices; TruncatedSeries wraps the
// same kernels so both paths compute identical floating-point results.
namespace series_kernel {

/// out = a * b, truncated Cauchy product. out must not alias a or b.
void mul(const double* a, const double* b, double* out, int n);

/// Coupled recurrence for s = sin(a), c = cos(a). s/c must not alias a.
void sin_cos(const double* a, double* s, double* c, int n);

/// t = tanh(a) via t' = (1 - t^2) a'. w is a workspace holding 1 - t^2.
void tanh(const double* a, double* t, double* w, int n);

}  // namespace series_kernel

/// Fixed-degree truncated power series. coeffs[k] is the k-th Taylor
/// coefficient (k-th derivative over k!) at the expansion point; coeffs[0]
/// is the function value. Degree is fixed at construction and preserved by
/// all arithmetic.
class TruncatedSeries {
 public:
  explicit TruncatedSeries(int degree);
  explicit TruncatedSeries(std::vector<double> coeffs);

  /// Series of the constant v: [v, 0, ..., 0].
  static TruncatedSeries constant(double v, int degree);
  /// Series of the expansion variable itself: [v, 1, 0, ..., 0].
  static TruncatedSeries identity(double v, int degree);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double operator[](int k) const { return coeffs_[k]; }
  double& operator[](int k) { return coeffs_[k]; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  TruncatedSeries operator+(const TruncatedSeries& rhs) const;
  TruncatedSeries operator-(const TruncatedSeries& rhs) const;
  TruncatedSeries operator*(const TruncatedSeries& rhs) const;
  TruncatedSeries scaled(double c) const;

  bool operator==(const TruncatedSeries& rhs) const = default;

 private:
  void require_same_degree(const TruncatedSeries& rhs) const;
  std::vector<double> coeffs_;
};

TruncatedSeries sin(const TruncatedSeries& a);
TruncatedSeries tanh(const TruncatedSeries& a);
/// Returns (sin a, cos a); the two share one recurrence.
std::pair<TruncatedSeries, TruncatedSeries> sin_cos(const TruncatedSeries& a);

}  // namespace evopde
