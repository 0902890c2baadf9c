#include "ofbm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ofbm/errors.hpp"

namespace ofbm {

namespace {

// log2(lambda_q) and log2(W_qq) tables over j1..j2, octave-major columns.
struct LogTables {
  Eigen::MatrixXd eig;   // n x span
  Eigen::MatrixXd diag;  // n x span
  std::vector<std::int64_t> k_count;
};

const OctaveSpectrum& octave_at(const WaveletSpectrum& spectrum, int j) {
  for (const OctaveSpectrum& oct : spectrum.octaves) {
    if (oct.octave == j) return oct;
  }
  throw validation_error("estimator: spectrum does not contain octave " +
                         std::to_string(j));
}

LogTables collect_logs(const WaveletSpectrum& spectrum,
                       const RegressionWeights& weights) {
  const int n = spectrum.n;
  const int span = weights.j2 - weights.j1 + 1;
  LogTables tables;
  tables.eig.resize(n, span);
  tables.diag.resize(n, span);
  tables.k_count.resize(static_cast<std::size_t>(span));
  for (int idx = 0; idx < span; ++idx) {
    const int j = weights.j1 + idx;
    const OctaveSpectrum& oct = octave_at(spectrum, j);
    tables.k_count[static_cast<std::size_t>(idx)] = oct.k_count;
    for (int q = 0; q < n; ++q) {
      const double lam = oct.eigvals[q];
      if (!(lam > 0.0)) {
        throw numerical_error("estimator: nonpositive eigenvalue at octave " +
                              std::to_string(j) + ", component " +
                              std::to_string(q + 1));
      }
      tables.eig(q, idx) = std::log2(lam);
      const double d = oct.w(q, q);
      if (!(d > 0.0)) {
        throw numerical_error("estimator: nonpositive diagonal entry at octave " +
                              std::to_string(j) + ", component " +
                              std::to_string(q + 1));
      }
      tables.diag(q, idx) = std::log2(d);
    }
  }
  return tables;
}

Eigen::VectorXd regress(const Eigen::MatrixXd& logs,
                        const RegressionWeights& weights) {
  const int n = static_cast<int>(logs.rows());
  const int span = weights.j2 - weights.j1 + 1;
  Eigen::VectorXd h(n);
  for (int q = 0; q < n; ++q) {
    double acc = 0.0;
    for (int idx = 0; idx < span; ++idx) {
      acc += weights.w[static_cast<std::size_t>(idx)] * logs(q, idx);
    }
    h[q] = 0.5 * acc;
  }
  return h;
}

// Residuals against the b-weighted least-squares line whose slope is fixed
// by the estimate: y_qj - (2 h_q) j - c_q with the weighted intercept c_q.
Eigen::MatrixXd residuals_for(const Eigen::MatrixXd& logs,
                              const Eigen::VectorXd& h,
                              const RegressionWeights& weights) {
  const int n = static_cast<int>(logs.rows());
  const int span = weights.j2 - weights.j1 + 1;
  double b_sum = 0.0;
  double bj_sum = 0.0;
  for (int idx = 0; idx < span; ++idx) {
    const double b = weights.b[static_cast<std::size_t>(idx)];
    b_sum += b;
    bj_sum += b * static_cast<double>(weights.j1 + idx);
  }
  Eigen::MatrixXd res(n, span);
  for (int q = 0; q < n; ++q) {
    const double slope = 2.0 * h[q];
    double by_sum = 0.0;
    for (int idx = 0; idx < span; ++idx) {
      by_sum += weights.b[static_cast<std::size_t>(idx)] * logs(q, idx);
    }
    const double intercept = (by_sum - slope * bj_sum) / b_sum;
    for (int idx = 0; idx < span; ++idx) {
      const double j = static_cast<double>(weights.j1 + idx);
      res(q, idx) = logs(q, idx) - slope * j - intercept;
    }
  }
  return res;
}

double median_of(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  if (m % 2 == 1) return values[m / 2];
  return (values[m / 2 - 1] + values[m / 2]) / 2.0;
}

HurstEstimates estimate_from_tables(const LogTables& tables,
                                    const RegressionWeights& weights,
                                    int subtraces) {
  HurstEstimates out;
  out.weights = weights;
  out.subtraces = subtraces;
  out.h_multivariate = regress(tables.eig, weights);
  out.h_univariate = regress(tables.diag, weights);
  out.residuals_multivariate = residuals_for(tables.eig, out.h_multivariate, weights);
  out.residuals_univariate = residuals_for(tables.diag, out.h_univariate, weights);
  const int n = static_cast<int>(tables.eig.rows());
  const int span = weights.j2 - weights.j1 + 1;
  out.per_octave.reserve(static_cast<std::size_t>(span) * n);
  for (int idx = 0; idx < span; ++idx) {
    for (int q = 0; q < n; ++q) {
      LogscaleRow row;
      row.octave = weights.j1 + idx;
      row.q = q + 1;
      row.k_count = tables.k_count[static_cast<std::size_t>(idx)];
      row.log2_lambda = tables.eig(q, idx);
      row.log2_diag = tables.diag(q, idx);
      row.lambda_positive = true;
      row.diag_positive = true;
      out.per_octave.push_back(row);
    }
  }
  return out;
}

} // namespace

RegressionWeights make_weights(int j1, int j2, const std::vector<double>& b) {
  if (j1 < 1) throw validation_error("make_weights: j1 must be >= 1");
  if (j2 <= j1) throw validation_error("make_weights: j2 must exceed j1");
  const int span = j2 - j1 + 1;
  if (static_cast<int>(b.size()) != span) {
    throw validation_error("make_weights: need one confidence scalar per octave (" +
                           std::to_string(span) + ")");
  }
  int positive = 0;
  for (double v : b) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw validation_error("make_weights: confidence scalars must be finite and >= 0");
    }
    if (v > 0.0) ++positive;
  }
  if (positive < 2) {
    throw validation_error("make_weights: at least two octaves need positive confidence");
  }
  double v0 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  for (int idx = 0; idx < span; ++idx) {
    const double j = static_cast<double>(j1 + idx);
    v0 += b[static_cast<std::size_t>(idx)];
    v1 += b[static_cast<std::size_t>(idx)] * j;
    v2 += b[static_cast<std::size_t>(idx)] * j * j;
  }
  const double denom = v0 * v2 - v1 * v1;
  if (!(denom > 0.0)) {
    throw validation_error("make_weights: degenerate confidence scalars "
                           "(regression denominator is not positive)");
  }
  RegressionWeights weights;
  weights.j1 = j1;
  weights.j2 = j2;
  weights.b = b;
  weights.w.resize(static_cast<std::size_t>(span));
  for (int idx = 0; idx < span; ++idx) {
    const double j = static_cast<double>(j1 + idx);
    weights.w[static_cast<std::size_t>(idx)] =
        b[static_cast<std::size_t>(idx)] * (v0 * j - v1) / denom;
  }
  return weights;
}

std::vector<double> uniform_scalars(int j1, int j2) {
  if (j2 <= j1) throw validation_error("uniform_scalars: j2 must exceed j1");
  return std::vector<double>(static_cast<std::size_t>(j2 - j1 + 1), 1.0);
}

std::vector<double> dyadic_scalars(int j1, int j2, std::int64_t nu) {
  if (j2 <= j1) throw validation_error("dyadic_scalars: j2 must exceed j1");
  if (nu < 1) throw validation_error("dyadic_scalars: nu must be positive");
  std::vector<double> b(static_cast<std::size_t>(j2 - j1 + 1));
  for (int idx = 0; idx <= j2 - j1; ++idx) {
    b[static_cast<std::size_t>(idx)] =
        static_cast<double>(nu) / std::pow(2.0, static_cast<double>(j1 + idx));
  }
  return b;
}

Eigen::VectorXd estimate_multivariate(const WaveletSpectrum& spectrum,
                                      const RegressionWeights& weights) {
  return regress(collect_logs(spectrum, weights).eig, weights);
}

Eigen::VectorXd estimate_univariate(const WaveletSpectrum& spectrum,
                                    const RegressionWeights& weights) {
  return regress(collect_logs(spectrum, weights).diag, weights);
}

HurstEstimates estimate(const WaveletSpectrum& spectrum,
                        const RegressionWeights& weights) {
  return estimate_from_tables(collect_logs(spectrum, weights), weights, 1);
}

HurstEstimates median_estimate(const std::vector<WaveletSpectrum>& spectra,
                               const RegressionWeights& weights) {
  if (spectra.empty()) {
    throw validation_error("median_estimate: need at least one spectrum");
  }
  const int n = spectra.front().n;
  for (const WaveletSpectrum& s : spectra) {
    if (s.n != n) {
      throw validation_error("median_estimate: spectra disagree on dimension");
    }
  }
  const std::size_t m = spectra.size();
  std::vector<LogTables> per_subtrace;
  per_subtrace.reserve(m);
  for (const WaveletSpectrum& s : spectra) {
    per_subtrace.push_back(collect_logs(s, weights));
  }
  const int span = weights.j2 - weights.j1 + 1;
  LogTables median;
  median.eig.resize(n, span);
  median.diag.resize(n, span);
  median.k_count.resize(static_cast<std::size_t>(span));
  std::vector<double> scratch(m);
  for (int idx = 0; idx < span; ++idx) {
    std::int64_t k_min = std::numeric_limits<std::int64_t>::max();
    for (const LogTables& t : per_subtrace) {
      k_min = std::min(k_min, t.k_count[static_cast<std::size_t>(idx)]);
    }
    median.k_count[static_cast<std::size_t>(idx)] = k_min;
    for (int q = 0; q < n; ++q) {
      for (std::size_t s = 0; s < m; ++s) {
        scratch[s] = per_subtrace[s].eig(q, idx);
      }
      median.eig(q, idx) = median_of(scratch);
      for (std::size_t s = 0; s < m; ++s) {
        scratch[s] = per_subtrace[s].diag(q, idx);
      }
      median.diag(q, idx) = median_of(scratch);
    }
  }
  return estimate_from_tables(median, weights, static_cast<int>(m));
}

std::vector<SamplePath> interleave_subtraces(const SamplePath& path, int m) {
  if (m < 1) throw validation_error("interleave_subtraces: m must be >= 1");
  const std::int64_t length = path.nu / m;
  if (length < 2) {
    throw validation_error("interleave_subtraces: path too short for " +
                           std::to_string(m) + " subtraces");
  }
  const int n = static_cast<int>(path.data.cols());
  std::vector<SamplePath> subtraces(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s) {
    SamplePath& sub = subtraces[static_cast<std::size_t>(s)];
    sub.nu = length;
    sub.seed = path.seed;
    sub.spec_hash = path.spec_hash;
    sub.data.resize(length, n);
    for (std::int64_t t = 0; t < length; ++t) {
      sub.data.row(t) = path.data.row(s + t * static_cast<std::int64_t>(m));
    }
  }
  return subtraces;
}

} // namespace ofbm
