#pragma once
// In-place radix-2 complex FFT for power-of-two sizes. The plan precomputes
// per-stage twiddle tables and the bit-reversal permutation; the butterfly
// loops run through the kernels layer.

#include <complex>
#include <cstddef>
#include <vector>

namespace bjj {

class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }

  // unnormalized forward transform, X_k = sum_j x_j e^{-2pi i jk/n}
  void forward(std::complex<double>* a) const;
  // inverse with 1/n normalization
  void inverse(std::complex<double>* a) const;

 private:
  void run(std::complex<double>* a,
           const std::vector<std::vector<std::complex<double>>>& tables) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::vector<std::complex<double>>> fwd_;  // one table per stage
  std::vector<std::vector<std::complex<double>>> inv_;
};

}  // namespace bjj
