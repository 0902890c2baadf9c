#include "ofbm/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ofbm/errors.hpp"
#include "ofbm/rng.hpp"

namespace ofbm {

namespace {

std::size_t next_power_of_two(std::size_t x) {
  std::size_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

} // namespace

SynthesisPlan build_plan(const OfbmSpec& spec, std::int64_t nu) {
  if (nu < 2) throw validation_error("build_plan: nu must be >= 2");
  SynthesisPlan plan;
  plan.spec = spec;
  validate_spec(plan.spec);  // normalizes; warnings were the loader's concern
  plan.nu = nu;
  plan.spec_hash = spec_fingerprint(plan.spec);

  const int n = plan.spec.n;
  std::size_t embed_len = next_power_of_two(2 * static_cast<std::size_t>(nu));
  AdmissibilityReport last;
  for (int attempt = 0; attempt <= 3; ++attempt, embed_len <<= 1) {
    const std::size_t half = embed_len / 2;
    std::vector<double> blocks = circulant_spectral_blocks(plan.spec, embed_len);

    double min_eig = std::numeric_limits<double>::infinity();
    double max_norm = 0.0;
    std::size_t worst = 0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    Eigen::MatrixXd g(n, n);
    for (std::size_t l = 0; l <= half; ++l) {
      double* block = blocks.data() + l * static_cast<std::size_t>(n) * n;
      g = Eigen::Map<const Eigen::MatrixXd>(block, n, n);
      es.compute(g);
      if (es.info() != Eigen::Success) {
        throw numerical_error("build_plan: eigendecomposition failed at frequency " +
                              std::to_string(l));
      }
      const double lo = es.eigenvalues().minCoeff();
      if (lo < min_eig) {
        min_eig = lo;
        worst = l;
      }
      max_norm = std::max(max_norm, es.eigenvalues().cwiseAbs().maxCoeff());
      // Factor S = U sqrt(max(lambda, 0)); rounding-level negatives clip to 0.
      Eigen::VectorXd sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      Eigen::Map<Eigen::MatrixXd>(block, n, n) = es.eigenvectors() * sq.asDiagonal();
    }
    last.embed_len = embed_len;
    last.min_eigenvalue = min_eig;
    last.worst_frequency = worst;
    last.max_block_norm = max_norm;
    last.threshold = 1e-9 * max_norm;
    last.pass = min_eig >= -last.threshold;
    if (last.pass) {
      plan.embed_len = embed_len;
      plan.spectral_factors = std::move(blocks);
      plan.fft = std::make_shared<FftPlan>(embed_len);
      return plan;
    }
  }
  throw admissibility_error(
      "build_plan: circulant embedding inadmissible up to embed_len = " +
      std::to_string(last.embed_len) + " (min spectral eigenvalue " +
      std::to_string(last.min_eigenvalue) + " at frequency " +
      std::to_string(last.worst_frequency) + ", threshold -" +
      std::to_string(last.threshold) +
      "); reduce cross-covariance magnitudes in premix_cov");
}

SamplePath synthesize(const SynthesisPlan& plan, std::uint64_t seed) {
  SynthesisWorkspace workspace;
  return synthesize(plan, seed, workspace);
}

SamplePath synthesize(const SynthesisPlan& plan, std::uint64_t seed,
                      SynthesisWorkspace& workspace) {
  if (plan.embed_len == 0 || !plan.fft) {
    throw validation_error("synthesize: plan is not built");
  }
  const int n = plan.spec.n;
  const std::size_t m = plan.embed_len;
  const std::size_t half = m / 2;
  const std::int64_t nu = plan.nu;

  workspace.freq.resize(n);
  for (auto& column : workspace.freq) column.resize(m);
  workspace.gauss.resize(4 * static_cast<std::size_t>(n));
  double* xi_re = workspace.gauss.data();
  double* xi_im = xi_re + n;
  double* acc_re = xi_im + n;
  double* acc_im = acc_re + n;

  NormalSampler rng(seed);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t l = 0; l < m; ++l) {
    for (int i = 0; i < n; ++i) {
      xi_re[i] = rng.normal() * inv_sqrt2;
      xi_im[i] = rng.normal() * inv_sqrt2;
      acc_re[i] = 0.0;
      acc_im[i] = 0.0;
    }
    const std::size_t fold = l <= half ? l : m - l;
    const double* s = plan.spectral_factors.data() +
                      fold * static_cast<std::size_t>(n) * n;
    for (int j = 0; j < n; ++j) {
      const double re = xi_re[j];
      const double im = xi_im[j];
      const double* col = s + static_cast<std::size_t>(j) * n;
      for (int i = 0; i < n; ++i) {
        acc_re[i] += col[i] * re;
        acc_im[i] += col[i] * im;
      }
    }
    for (int i = 0; i < n; ++i) {
      workspace.freq[static_cast<std::size_t>(i)][l] = {acc_re[i], acc_im[i]};
    }
  }

  for (int i = 0; i < n; ++i) {
    plan.fft->inverse(workspace.freq[static_cast<std::size_t>(i)].data());
  }

  SamplePath path;
  path.nu = nu;
  path.seed = seed;
  path.spec_hash = plan.spec_hash;
  Eigen::MatrixXd premix(nu, n);
  const double scale = std::sqrt(2.0 / static_cast<double>(m));
  for (int i = 0; i < n; ++i) {
    const auto& column = workspace.freq[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (std::int64_t k = 0; k < nu; ++k) {
      acc += scale * column[static_cast<std::size_t>(k)].real();
      premix(k, i) = acc;
    }
  }
  path.data.noalias() = premix * plan.spec.mixing.transpose();
  return path;
}

CholeskyOracle::CholeskyOracle(const OfbmSpec& spec, std::int64_t nu)
    : spec_(spec), nu_(nu) {
  if (nu < 1 || nu > 1024) {
    throw validation_error("cholesky_oracle: nu must be between 1 and 1024");
  }
  validate_spec(spec_);
  spec_hash_ = spec_fingerprint(spec_);
  std::vector<std::int64_t> times(static_cast<std::size_t>(nu));
  std::iota(times.begin(), times.end(), std::int64_t{1});
  const Eigen::MatrixXd cov = exact_path_covariance(spec_, times);

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
    return;
  }
  // Rounding can push a genuinely PSD covariance just below the Cholesky
  // threshold; retry with an eigenvalue factorization, clipping only
  // rounding-level negatives.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw numerical_error("cholesky_oracle: eigendecomposition of the path covariance failed");
  }
  const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-9 * max_eig) {
    throw numerical_error(
        "cholesky_oracle: path covariance is not positive semidefinite (min eigenvalue " +
        std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
  factor_ = es.eigenvectors() *
            es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

SamplePath CholeskyOracle::draw(std::uint64_t seed) const {
  const int n = spec_.n;
  NormalSampler rng(seed);
  Eigen::VectorXd z(factor_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd y = factor_ * z;
  SamplePath path;
  path.nu = nu_;
  path.seed = seed;
  path.spec_hash = spec_hash_;
  path.data.resize(nu_, n);
  for (std::int64_t k = 0; k < nu_; ++k) {
    for (int i = 0; i < n; ++i) {
      path.data(k, i) = y[k * n + i];
    }
  }
  return path;
}

SamplePath cholesky_oracle(const OfbmSpec& spec, std::int64_t nu, std::uint64_t seed) {
  return CholeskyOracle(spec, nu).draw(seed);
}

} // namespace ofbm
