#include "bjj/fft.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "bjj/kernels.hpp"

namespace bjj {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("Fft: size must be a power of two");
  bitrev_.resize(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bitrev_[i] = j;
    std::size_t bit = n >> 1;
    while (bit && (j & bit)) {
      j ^= bit;
      bit >>= 1;
    }
    j |= bit;
  }
  for (std::size_t half = 1; half < n; half <<= 1) {
    std::vector<std::complex<double>> fw(half), iv(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = -kPi * static_cast<double>(k) / static_cast<double>(half);
      fw[k] = {std::cos(ang), std::sin(ang)};
      iv[k] = std::conj(fw[k]);
    }
    fwd_.push_back(std::move(fw));
    inv_.push_back(std::move(iv));
  }
}

void Fft::run(std::complex<double>* a,
              const std::vector<std::vector<std::complex<double>>>& tables) const {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t r = bitrev_[i];
    if (i < r) std::swap(a[i], a[r]);
  }
  std::size_t stage = 0;
  for (std::size_t half = 1; half < n_; half <<= 1, ++stage)
    kernels::fft_stage(a, tables[stage].data(), half, n_);
}

void Fft::forward(std::complex<double>* a) const { run(a, fwd_); }

void Fft::inverse(std::complex<double>* a) const {
  run(a, inv_);
  const double s = 1.0 / static_cast<double>(n_);
  kernels::cscale({s, 0.0}, a, n_);
}

}  // namespace bjj
