#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ofbm {

// Generative model of an n-variate operator fractional Brownian motion with
// real simple Hurst eigenvalues: B(t) = P * X(t), where X has independent-of-P
// instantaneous covariance Sigma and per-coordinate exponents hurst[q].
struct OfbmSpec {
  int n = 0;
  Eigen::VectorXd hurst;       // ascending, each in (0, 1)
  Eigen::MatrixXd mixing;      // P: nonsingular, unit-Euclidean-norm columns
  Eigen::MatrixXd premix_cov;  // Sigma: symmetric positive definite diagonal entries > 0
};

// Discrete observations of one realization.  Row k (0-based) holds the
// observation at time k+1; the process starts at zero at time 0, which is
// not stored.  Unit sampling step.
struct SamplePath {
  Eigen::MatrixXd data;  // nu x n
  std::int64_t nu = 0;
  std::uint64_t seed = 0;      // provenance: RNG seed used, 0 if external
  std::string spec_hash;       // provenance: fingerprint of the generating spec
};

// Checks all OfbmSpec invariants, throwing validation_error on violations.
// Normalizes in place: mixing columns rescaled to unit norm, premix_cov
// symmetrized exactly.  Returns human-readable warnings (near-unit columns
// rescaled, h = 1/2 present, repeated eigenvalues).
std::vector<std::string> validate_spec(OfbmSpec& spec);

// Stable hex fingerprint of an OfbmSpec, so synthesized paths can be traced
// back to the exact model that generated them.
std::string spec_fingerprint(const OfbmSpec& spec);

// Time-reversible cross-covariance of the pre-mix coordinate pair (i, j):
//   R_ij(s, t) = (sigma_ij / 2) * (|s|^h + |t|^h - |t-s|^h),  h = h_i + h_j.
double mfbm_covariance(double hurst_i, double hurst_j, double sigma_ij,
                       double s, double t);

// Autocovariance of the pre-mix increment (fractional Gaussian noise) pair:
//   gamma_ij(k) = R_ij(1, k+1) - R_ij(1, k) - R_ij(0, k+1) + R_ij(0, k)
//               = (sigma_ij / 2) * (|k+1|^h - 2|k|^h + |k-1|^h).
// Evaluated in a cancellation-safe form for large |k|.
double increment_autocovariance(double hurst_i, double hurst_j,
                                double sigma_ij, std::int64_t k);

// Joint covariance of the mixed process at the given distinct nonnegative
// integer times.  Entry layout is time-major: index (t_idx * n + coord).
// The result is exactly symmetric.
Eigen::MatrixXd exact_path_covariance(const OfbmSpec& spec,
                                      const std::vector<std::int64_t>& times);

// c^H = P * diag(c^{h_q}) * P^{-1} for c > 0.
Eigen::MatrixXd operator_power(const OfbmSpec& spec, double c);

// Spectral blocks of the circulant embedding of the pre-mix increment
// covariance: for each Fourier index l = 0..embed_len/2, the real symmetric
// n x n matrix G_l = sum_m c_ij(m) exp(-2*pi*i*l*m/M) with the even circulant
// symbol c_ij(m) = gamma_ij(min(m, M-m)).  Blocks for l > M/2 mirror G_{M-l}.
// Returned as one contiguous array of (embed_len/2 + 1) n x n column-major
// blocks.
std::vector<double> circulant_spectral_blocks(const OfbmSpec& spec,
                                              std::size_t embed_len);

struct AdmissibilityReport {
  bool pass = false;
  std::size_t embed_len = 0;
  double min_eigenvalue = 0.0;   // most negative spectral-block eigenvalue
  std::size_t worst_frequency = 0;
  double max_block_norm = 0.0;   // largest block spectral norm
  double threshold = 0.0;        // pass iff min_eigenvalue >= -threshold
};

// Decides whether exact circulant-embedding synthesis is possible at the
// given embedding length: every spectral block must be nonnegative definite
// up to -1e-9 * (max block norm) rounding slack.
AdmissibilityReport check_admissibility(const OfbmSpec& spec,
                                        std::size_t embed_len);

} // namespace ofbm
