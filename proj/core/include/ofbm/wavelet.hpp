#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ofbm/model.hpp"

namespace ofbm {

enum class WaveletVariant {
  extremal_phase,    // minimum-phase root selection (classic Daubechies)
  least_asymmetric,  // closest-to-linear-phase root selection (symlets)
};

// Orthogonal Daubechies filter pair with n_moments vanishing moments.
// Filter length L = 2 * n_moments; lowpass sums to sqrt(2); highpass is the
// quadrature mirror g_k = (-1)^k h_{L-1-k}.
struct WaveletBank {
  int n_moments = 0;
  std::vector<double> lowpass;
  std::vector<double> highpass;
  WaveletVariant variant = WaveletVariant::least_asymmetric;
};

// Normalized detail coefficients at one octave: coeffs(k, c) holds
// 2^{-j/2} * d_j[k] for column c, boundary-affected entries dropped.
struct OctaveCoefficients {
  int octave = 0;
  Eigen::MatrixXd coeffs;      // k_count x n
  std::int64_t k_count = 0;
};

// Generates the filter bank by spectral factorization of the Daubechies
// half-band polynomial.  Supported range: 1 <= n_moments <= 10.
WaveletBank make_bank(int n_moments, WaveletVariant variant);

// Number of boundary-free coefficients that survive at the given octave when
// starting from nu samples: K_0 = nu, K_{j+1} = floor((K_j - L)/2) + 1 while
// K_j >= L, else 0.
std::int64_t coefficient_count(std::int64_t nu, int n_moments, int octave);

// Decimating filter-bank cascade.  Initial approximation is the path itself;
// per octave each column is independently correlated with the filters and
// downsampled by two, keeping only outputs whose filter support lies fully
// inside the available parent coefficients.  Emits normalized details for
// j = 1..j_max.
std::vector<OctaveCoefficients> pyramid(const SamplePath& path,
                                        const WaveletBank& bank, int j_max);

// Default coarsest analysis octave: log2(nu) - n_moments, lowered until the
// retained coefficient count satisfies K_j >= n + 1 (sample wavelet variance
// matrices of an n-variate path need K_j > n to be almost surely
// nonsingular).  Throws if no octave qualifies.
int deepest_octave(std::int64_t nu, const WaveletBank& bank, int n);

} // namespace ofbm
