#include "evopde/fft.hpp"

#include <cmath>
#include <numbers>

#include "evopde/errors.hpp"

namespace evopde {

Fft::Fft(int n) : n_(n) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw ConfigError("FFT size must be a power of two, got " + std::to_string(n));
  bitrev_.assign(n, 0);
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < log2n; ++b)
      if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
    bitrev_[i] = r;
  }
  // Twiddles laid out stage by stage: for stage length len, entries
  // e^(±2πi j/len) for j in [0, len/2).
  twiddle_.reserve(n);
  twiddle_inv_.reserve(n);
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / len;
    for (int j = 0; j < len / 2; ++j) {
      twiddle_.emplace_back(std::cos(ang * j), -std::sin(ang * j));
      twiddle_inv_.emplace_back(std::cos(ang * j), std::sin(ang * j));
    }
  }
}

void Fft::transform(std::complex<double>* a, bool invert) const {
  const auto& tw = invert ? twiddle_inv_ : twiddle_;
  for (int i = 0; i < n_; ++i) {
    const int r = bitrev_[i];
    if (i < r) std::swap(a[i], a[r]);
  }
  std::size_t tw_base = 0;
  for (int len = 2; len <= n_; len <<= 1) {
    const int half = len / 2;
    for (int start = 0; start < n_; start += len) {
      for (int j = 0; j < half; ++j) {
        const std::complex<double> w = tw[tw_base + j];
        std::complex<double>& lo = a[start + j];
        std::complex<double>& hi = a[start + j + half];
        const std::complex<double> t = w * hi;
        hi = lo - t;
        lo += t;
      }
    }
    tw_base += half;
  }
}

void Fft::forward(std::complex<double>* a) const { transform(a, false); }

void Fft::inverse(std::complex<double>* a) const {
  transform(a, true);
  const double inv = 1.0 / n_;
  for (int i = 0; i < n_; ++i) a[i] *= inv;
}

}  // namespace evopde
