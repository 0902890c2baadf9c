#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ofbm/wavelet.hpp"

namespace ofbm {

// Sample wavelet variance at one octave together with its sorted
// eigendecomposition.  Eigenvalues ascending, rounding-level negatives
// clipped to zero; eigenvector columns carry a deterministic sign
// (first significant component positive).
struct OctaveSpectrum {
  int octave = 0;
  std::int64_t k_count = 0;
  Eigen::MatrixXd w;          // n x n, exactly symmetric
  Eigen::VectorXd eigvals;    // ascending
  Eigen::MatrixXd eigvecs;    // columns matched to eigvals
  Eigen::VectorXd diag_log2;  // log2(w_qq); NaN where w_qq <= 0
};

struct WaveletSpectrum {
  int n = 0;
  std::vector<OctaveSpectrum> octaves;
};

// W(2^j) = (1/K_j) sum_k D(2^j, k) D(2^j, k)^T, built symmetric by
// construction (rank update of the lower triangle, then mirrored).
Eigen::MatrixXd wavelet_variance(const OctaveCoefficients& coeffs);

// Full eigendecomposition of a symmetric matrix: eigenvalues ascending,
// orthogonal eigenvectors with the deterministic sign convention.
// Requires symmetry within 1e-10 relative; throws numerical_error on
// non-convergence.
void eigh_sorted(const Eigen::MatrixXd& w, Eigen::VectorXd& eigvals,
                 Eigen::MatrixXd& eigvecs);

// Per-octave variance matrices and eigendecompositions for the whole
// coefficient cascade.
WaveletSpectrum compute_spectrum(const std::vector<OctaveCoefficients>& coeffs);

// One row of the plot-ready logscale table.  Nonpositive statistics are
// flagged and carry NaN in the log columns rather than failing the export.
struct LogscaleRow {
  int octave = 0;
  int q = 0;  // 1-based component index
  double log2_lambda = 0.0;
  double log2_diag = 0.0;
  std::int64_t k_count = 0;
  bool lambda_positive = true;
  bool diag_positive = true;
};

std::vector<LogscaleRow> logscale_diagram(const WaveletSpectrum& spectrum);

} // namespace ofbm
