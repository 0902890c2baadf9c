#include "ofbm/fft.hpp"

#include <cmath>
#include <numbers>

#include "ofbm/errors.hpp"

namespace ofbm {

FftPlan::FftPlan(std::size_t size) : size_(size) {
  if (size == 0 || (size & (size - 1)) != 0) {
    throw validation_error("fft: size must be a power of two, got " + std::to_string(size));
  }
  bitrev_.resize(size);
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < size) ++log2n;
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t rev = 0;
    for (std::size_t bit = 0; bit < log2n; ++bit) {
      if (i & (std::size_t{1} << bit)) rev |= std::size_t{1} << (log2n - 1 - bit);
    }
    bitrev_[i] = rev;
  }
  twiddle_.resize(size / 2);
  const double step = -2.0 * std::numbers::pi / static_cast<double>(size);
  for (std::size_t k = 0; k < size / 2; ++k) {
    const double angle = step * static_cast<double>(k);
    twiddle_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void FftPlan::transform(std::complex<double>* data, bool invert) const {
  const std::size_t n = size_;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddle_[k * stride];
        if (invert) w = std::conj(w);
        const std::complex<double> even = data[start + k];
        const std::complex<double> odd = data[start + k + half] * w;
        data[start + k] = even + odd;
        data[start + k + half] = even - odd;
      }
    }
  }
}

} // namespace ofbm
