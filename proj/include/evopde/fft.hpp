#pragma once

#include <complex>
#include <vector>

namespace evopde {

/// Iterative radix-2 FFT with precomputed twiddles. Sized once, reused for
/// every time step of a spectral solve.
class Fft {
 public:
  explicit Fft(int n);  // n must be a power of two

  int size() const { return n_; }

  /// In-place forward DFT (no scaling).
  void forward(std::complex<double>* a) const;
  /// In-place inverse DFT (scaled by 1/n).
  void inverse(std::complex<double>* a) const;

 private:
  void transform(std::complex<double>* a, bool invert) const;
  int n_;
  std::vector<int> bitrev_;
  std::vector<std::complex<double>> twiddle_;      // forward
  std::vector<std::complex<double>> twiddle_inv_;  // inverse
};

}  // namespace evopde
