#include "ofbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <sstream>

#include "ofbm/errors.hpp"
#include "ofbm/fft.hpp"

namespace ofbm {

namespace {

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw validation_error(std::string("non-finite value for ") + what);
  }
}

void fnv_mix(std::uint64_t& h, const void* bytes, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

} // namespace

std::vector<std::string> validate_spec(OfbmSpec& spec) {
  std::vector<std::string> warnings;
  if (spec.n < 1) throw validation_error("spec: dimension n must be >= 1");
  const int n = spec.n;
  if (spec.hurst.size() != n) {
    throw validation_error("spec: hurst must have exactly n entries");
  }
  if (spec.mixing.rows() != n || spec.mixing.cols() != n) {
    throw validation_error("spec: mixing matrix must be n x n");
  }
  if (spec.premix_cov.rows() != n || spec.premix_cov.cols() != n) {
    throw validation_error("spec: premix_cov matrix must be n x n");
  }
  if (!spec.hurst.allFinite() || !spec.mixing.allFinite() || !spec.premix_cov.allFinite()) {
    throw validation_error("spec: all entries must be finite");
  }

  for (int q = 0; q < n; ++q) {
    const double h = spec.hurst[q];
    if (!(h > 0.0 && h < 1.0)) {
      throw validation_error("spec: hurst eigenvalues must lie strictly in (0, 1)");
    }
    if (q > 0 && spec.hurst[q] < spec.hurst[q - 1]) {
      throw validation_error("spec: hurst eigenvalues must be sorted ascending");
    }
  }
  for (int q = 0; q < n; ++q) {
    if (spec.hurst[q] == 0.5) {
      warnings.push_back("hurst[" + std::to_string(q + 1) +
                         "] = 1/2: outside the estimator theory's eigenvalue region");
      break;
    }
  }
  for (int q = 1; q < n; ++q) {
    if (spec.hurst[q] == spec.hurst[q - 1]) {
      warnings.push_back("repeated hurst eigenvalues: the simple-eigenvalue "
                         "assumption does not hold; estimates of the repeated "
                         "value are still produced");
      break;
    }
  }

  bool rescaled = false;
  for (int q = 0; q < n; ++q) {
    const double norm = spec.mixing.col(q).norm();
    if (norm < 1e-300) {
      throw validation_error("spec: mixing column " + std::to_string(q + 1) + " is zero");
    }
    if (std::abs(norm - 1.0) > 1e-12) {
      spec.mixing.col(q) /= norm;
      rescaled = true;
    }
  }
  if (rescaled) {
    warnings.push_back("mixing columns rescaled to unit Euclidean norm");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(spec.mixing);
  if (!lu.isInvertible()) {
    throw validation_error("spec: mixing matrix is singular");
  }

  const double sigma_scale = spec.premix_cov.cwiseAbs().maxCoeff();
  const double asym = (spec.premix_cov - spec.premix_cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(sigma_scale, 1.0)) {
    throw validation_error("spec: premix_cov is not symmetric");
  }
  spec.premix_cov = ((spec.premix_cov + spec.premix_cov.transpose()) / 2.0).eval();
  for (int q = 0; q < n; ++q) {
    if (!(spec.premix_cov(q, q) > 0.0)) {
      throw validation_error("spec: premix_cov diagonal entries must be positive");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.premix_cov);
  if (es.info() != Eigen::Success) {
    throw numerical_error("spec: eigendecomposition of premix_cov failed");
  }
  const double max_abs_eig = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-12 * max_abs_eig) {
    throw validation_error("spec: premix_cov is not positive semidefinite");
  }
  return warnings;
}

std::string spec_fingerprint(const OfbmSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::int64_t n64 = spec.n;
  fnv_mix(h, &n64, sizeof n64);
  fnv_mix(h, spec.hurst.data(), sizeof(double) * spec.hurst.size());
  fnv_mix(h, spec.mixing.data(), sizeof(double) * spec.mixing.size());
  fnv_mix(h, spec.premix_cov.data(), sizeof(double) * spec.premix_cov.size());
  std::ostringstream os;
  os << std::hex;
  for (int i = 15; i >= 0; --i) os << ((h >> (4 * i)) & 0xF);
  return os.str();
}

double mfbm_covariance(double hurst_i, double hurst_j, double sigma_ij,
                       double s, double t) {
  require_finite(hurst_i, "hurst_i");
  require_finite(hurst_j, "hurst_j");
  require_finite(sigma_ij, "sigma_ij");
  require_finite(s, "s");
  require_finite(t, "t");
  if (!(hurst_i > 0.0 && hurst_i < 1.0 && hurst_j > 0.0 && hurst_j < 1.0)) {
    throw validation_error("mfbm_covariance: hurst exponents must lie in (0, 1)");
  }
  const double h = hurst_i + hurst_j;
  const auto pow_abs = [h](double x) {
    return x == 0.0 ? 0.0 : std::pow(std::abs(x), h);
  };
  return 0.5 * sigma_ij * (pow_abs(s) + pow_abs(t) - pow_abs(t - s));
}

double increment_autocovariance(double hurst_i, double hurst_j,
                                double sigma_ij, std::int64_t k) {
  if (!(hurst_i > 0.0 && hurst_i < 1.0 && hurst_j > 0.0 && hurst_j < 1.0)) {
    throw validation_error("increment_autocovariance: hurst exponents must lie in (0, 1)");
  }
  const double h = hurst_i + hurst_j;
  const double ka = static_cast<double>(k < 0 ? -k : k);
  if (ka == 0.0) return sigma_ij;
  if (h == 1.0) return 0.0;  // white increments (Brownian case), exactly
  if (ka <= 16.0) {
    return 0.5 * sigma_ij *
           (std::pow(ka + 1.0, h) - 2.0 * std::pow(ka, h) + std::pow(ka - 1.0, h));
  }
  // Second difference of |k|^h in a cancellation-safe form:
  // k^h * ((1 + 1/k)^h - 2 + (1 - 1/k)^h), each bracket term via expm1/log1p.
  const double inv = 1.0 / ka;
  const double bracket = std::expm1(h * std::log1p(inv)) + std::expm1(h * std::log1p(-inv));
  return 0.5 * sigma_ij * std::pow(ka, h) * bracket;
}

Eigen::MatrixXd exact_path_covariance(const OfbmSpec& spec,
                                      const std::vector<std::int64_t>& times) {
  const int n = spec.n;
  const std::size_t m = times.size();
  if (m == 0) throw validation_error("exact_path_covariance: empty time list");
  for (std::size_t a = 0; a < m; ++a) {
    if (times[a] < 0) {
      throw validation_error("exact_path_covariance: times must be nonnegative");
    }
    for (std::size_t b = a + 1; b < m; ++b) {
      if (times[a] == times[b]) {
        throw validation_error("exact_path_covariance: times must be distinct");
      }
    }
  }
  const Eigen::MatrixXd& P = spec.mixing;
  Eigen::MatrixXd cov(m * n, m * n);
  Eigen::MatrixXd r(n, n);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      const double s = static_cast<double>(times[a]);
      const double t = static_cast<double>(times[b]);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          const double v = mfbm_covariance(spec.hurst[i], spec.hurst[j],
                                           spec.premix_cov(i, j), s, t);
          r(i, j) = v;
          r(j, i) = v;
        }
      }
      const Eigen::MatrixXd block = P * r * P.transpose();
      const Eigen::MatrixXd sym_block = (block + block.transpose()) / 2.0;
      cov.block(a * n, b * n, n, n) = sym_block;
      if (b != a) cov.block(b * n, a * n, n, n) = sym_block.transpose();
    }
  }
  return cov;
}

Eigen::MatrixXd operator_power(const OfbmSpec& spec, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw validation_error("operator_power: scale must be positive and finite");
  }
  Eigen::VectorXd d(spec.n);
  for (int q = 0; q < spec.n; ++q) d[q] = std::pow(c, spec.hurst[q]);
  const Eigen::MatrixXd& P = spec.mixing;
  return P * d.asDiagonal() * P.inverse();
}

std::vector<double> circulant_spectral_blocks(const OfbmSpec& spec,
                                              std::size_t embed_len) {
  if (!is_power_of_two(embed_len) || embed_len < 2) {
    throw validation_error("circulant_spectral_blocks: embed_len must be a power of two >= 2");
  }
  const int n = spec.n;
  const std::size_t m = embed_len;
  const std::size_t half = m / 2;
  std::vector<double> blocks((half + 1) * static_cast<std::size_t>(n) * n, 0.0);
  const FftPlan fft(m);
  std::vector<std::complex<double>> buf(m);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (std::size_t lag = 0; lag <= half; ++lag) {
        const double g = increment_autocovariance(
            spec.hurst[i], spec.hurst[j], spec.premix_cov(i, j),
            static_cast<std::int64_t>(lag));
        buf[lag] = g;
        if (lag != 0 && lag != half) buf[m - lag] = g;
      }
      fft.forward(buf.data());
      // The symbol is real and even, so the transform is real; the imaginary
      // part is rounding noise and is discarded.
      for (std::size_t l = 0; l <= half; ++l) {
        const double v = buf[l].real();
        double* block = blocks.data() + l * static_cast<std::size_t>(n) * n;
        block[j * n + i] = v;
        block[i * n + j] = v;
      }
    }
  }
  return blocks;
}

AdmissibilityReport check_admissibility(const OfbmSpec& spec,
                                        std::size_t embed_len) {
  if (!is_power_of_two(embed_len)) {
    throw validation_error("check_admissibility: embed_len must be a power of two");
  }
  const int n = spec.n;
  const std::size_t half = embed_len / 2;
  const std::vector<double> blocks = circulant_spectral_blocks(spec, embed_len);

  AdmissibilityReport report;
  report.embed_len = embed_len;
  double min_eig = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  std::size_t worst = 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (std::size_t l = 0; l <= half; ++l) {
    const Eigen::Map<const Eigen::MatrixXd> g(
        blocks.data() + l * static_cast<std::size_t>(n) * n, n, n);
    es.compute(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw numerical_error("check_admissibility: eigendecomposition failed at frequency " +
                            std::to_string(l));
    }
    const double lo = es.eigenvalues().minCoeff();
    const double hi_abs = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lo < min_eig) {
      min_eig = lo;
      worst = l;
    }
    max_norm = std::max(max_norm, hi_abs);
  }
  report.min_eigenvalue = min_eig;
  report.worst_frequency = worst;
  report.max_block_norm = max_norm;
  report.threshold = 1e-9 * max_norm;
  report.pass = min_eig >= -report.threshold;
  return report;
}

} // namespace ofbm
