#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ofbm/spectrum.hpp"

namespace ofbm {

// Weighted log2-regression design over octaves j1..j2.  The confidence
// scalars b_j >= 0 are free; the weights
//   w_j = b_j (V_0 j - V_1) / (V_0 V_2 - V_1^2),  V_p = sum_j j^p b_j,
// satisfy sum_j w_j = 0 and sum_j j w_j = 1.
struct RegressionWeights {
  int j1 = 0;
  int j2 = 0;
  std::vector<double> b;  // indexed j1..j2
  std::vector<double> w;
};

RegressionWeights make_weights(int j1, int j2, const std::vector<double>& b);

// Confidence-scalar policies: all-ones, and the variance-motivated
// b_j = nu / 2^j (proportional to the ideal coefficient count per octave).
std::vector<double> uniform_scalars(int j1, int j2);
std::vector<double> dyadic_scalars(int j1, int j2, std::int64_t nu);

// h_q = (1/2) sum_j w_j log2(lambda_q(W(2^j))), q = 1..n (ascending
// eigenvalue order).  Throws numerical_error naming (j, q) on a nonpositive
// eigenvalue inside the regression range.
Eigen::VectorXd estimate_multivariate(const WaveletSpectrum& spectrum,
                                      const RegressionWeights& weights);

// Entrywise baseline: same regression on the diagonal entries W(2^j)_qq
// (q = coordinate index).
Eigen::VectorXd estimate_univariate(const WaveletSpectrum& spectrum,
                                    const RegressionWeights& weights);

// Full estimation record: both estimator families, the logscale table the
// regression consumed, and per-(q, j) residuals against the weighted
// least-squares line with slope fixed by the estimate.
struct HurstEstimates {
  Eigen::VectorXd h_multivariate;
  Eigen::VectorXd h_univariate;
  RegressionWeights weights;
  std::vector<LogscaleRow> per_octave;   // rows for j1..j2, all q
  Eigen::MatrixXd residuals_multivariate;  // n x (j2 - j1 + 1)
  Eigen::MatrixXd residuals_univariate;
  int subtraces = 1;  // how many spectra were medianed (1 = plain estimate)
};

HurstEstimates estimate(const WaveletSpectrum& spectrum,
                        const RegressionWeights& weights);

// Robust variant: entrywise median of log2(lambda_q) and log2(W_qq) across
// subtrace spectra per (j, q), then the same regression on the medianed
// curves.  All spectra must share the dimension and cover j1..j2; reported
// K_j is the minimum across subtraces.  With one spectrum this reduces
// exactly to estimate().
HurstEstimates median_estimate(const std::vector<WaveletSpectrum>& spectra,
                               const RegressionWeights& weights);

// Deterministic time-interleaving splitter: subtrace s collects rows
// s, s+m, s+2m, ... (equal lengths, trailing remainder dropped).  A stand-in
// for externally provided subtraces when only one long series is available.
std::vector<SamplePath> interleave_subtraces(const SamplePath& path, int m);

} // namespace ofbm
