#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace ofbm {

// In-place iterative radix-2 complex FFT for power-of-two sizes, with
// precomputed twiddle factors and bit-reversal table.  Both directions are
// unnormalized (inverse(forward(x)) == size * x).  A plan is immutable after
// construction and safe to share across threads.
//
// Deliberately self-contained: synthesis must be bit-identical for a given
// seed regardless of worker count, which rules out libraries with global
// planner state.
class FftPlan {
public:
  explicit FftPlan(std::size_t size);

  std::size_t size() const { return size_; }

  void forward(std::complex<double>* data) const { transform(data, false); }
  void inverse(std::complex<double>* data) const { transform(data, true); }

private:
  void transform(std::complex<double>* data, bool invert) const;

  std::size_t size_;
  std::vector<std::size_t> bitrev_;
  // twiddle_[k] = exp(-2*pi*i*k/size), k = 0..size/2-1
  std::vector<std::complex<double>> twiddle_;
};

} // namespace ofbm
