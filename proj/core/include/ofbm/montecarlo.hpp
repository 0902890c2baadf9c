#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "ofbm/estimator.hpp"
#include "ofbm/model.hpp"
#include "ofbm/wavelet.hpp"

namespace ofbm {

enum class ScalarPolicy { uniform, dyadic };  // confidence scalars b_j

struct McConfig {
  OfbmSpec spec;
  std::vector<std::int64_t> nus;  // ascending powers of two
  int reps = 0;
  std::uint64_t base_seed = 0;
  int n_moments = 2;
  WaveletVariant variant = WaveletVariant::least_asymmetric;
  int j1 = 6;
  int j2 = -1;  // -1: per-nu default, deepest_octave(nu)
  ScalarPolicy scalar_policy = ScalarPolicy::dyadic;
  int bootstrap_resamples = 1000;
  double ci_level = 0.95;
};

// Per-(nu, estimator family, component) moment summary.  Entries that need
// more replications than were run (std and shape moments at reps < 2,
// bootstrap bounds at reps < 10) hold NaN.
struct McCell {
  double mean = 0.0;
  double bias = 0.0;  // mean minus the matching Hurst eigenvalue
  double stddev = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct McNuResult {
  std::int64_t nu = 0;
  int j1 = 0;
  int j2 = 0;
  std::vector<McCell> multivariate;  // size n
  std::vector<McCell> univariate;
  Eigen::MatrixXd cov_multivariate;  // n x n unbiased sample covariance
  Eigen::MatrixXd cov_univariate;
  Eigen::MatrixXd raw_multivariate;  // reps x n, row r = replication r
  Eigen::MatrixXd raw_univariate;
};

struct McSummary {
  int n = 0;
  int reps = 0;
  std::uint64_t base_seed = 0;
  std::vector<McNuResult> by_nu;
  // OLS slope of log2(std) against log2(nu) per component; NaN when fewer
  // than two sample sizes have a defined standard deviation.
  std::vector<double> std_slope_multivariate;
  std::vector<double> std_slope_univariate;
};

// Runs the replication protocol: per nu one synthesis plan, replication r
// seeded as mix_seed(base_seed, nu, r), pipeline synthesize -> pyramid ->
// spectrum -> both estimators.  Results land in slots keyed by r, so the
// summary is bit-identical for every worker count.  The first failing
// replication (smallest nu, then r) aborts the run with its seed in the
// message for exact replay.
McSummary run_monte_carlo(const McConfig& config, int workers);

// Percentile bootstrap of the sample mean; deterministic given the seed.
// Returns NaN bounds when fewer than 10 samples are supplied.
std::pair<double, double> bootstrap_ci(const std::vector<double>& samples,
                                       double level, int resamples,
                                       std::uint64_t seed);

// Unbiased sample covariance of the columns of an (R x n) estimate matrix.
Eigen::MatrixXd cross_covariances(const Eigen::MatrixXd& estimates);

} // namespace ofbm
