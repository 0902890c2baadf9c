#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ofbm/errors.hpp"
#include "ofbm/model.hpp"
#include "ofbm/rng.hpp"
#include "ofbm/spectrum.hpp"
#include "ofbm/synthesis.hpp"
#include "ofbm/wavelet.hpp"

using ofbm::OfbmSpec;

namespace {

OfbmSpec diag_spec(const std::vector<double>& hurst) {
  OfbmSpec spec;
  spec.n = static_cast<int>(hurst.size());
  spec.hurst = Eigen::Map<const Eigen::VectorXd>(hurst.data(), spec.n);
  spec.mixing = Eigen::MatrixXd::Identity(spec.n, spec.n);
  spec.premix_cov = Eigen::MatrixXd::Identity(spec.n, spec.n);
  ofbm::validate_spec(spec);
  return spec;
}

Eigen::VectorXd increments(const Eigen::VectorXd& column) {
  Eigen::VectorXd x(column.size());
  x(0) = column(0);  // B(1) - B(0), with B(0) = 0
  for (Eigen::Index i = 1; i < column.size(); ++i) x(i) = column(i) - column(i - 1);
  return x;
}

// Sample covariance (about zero mean, matching the process mean) of the
// stacked observation vectors at the given times, over R replications drawn
// by `draw`.
template <typename Draw>
Eigen::MatrixXd sample_covariance(const std::vector<std::int64_t>& times, int n,
                                  int reps, Draw&& draw) {
  const int dim = static_cast<int>(times.size()) * n;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd v(dim);
  for (int r = 0; r < reps; ++r) {
    const ofbm::SamplePath path = draw(r);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      for (int c = 0; c < n; ++c) {
        // Row k holds the observation at time k+1.
        v(static_cast<int>(ti) * n + c) = path.data(times[ti] - 1, c);
      }
    }
    acc.noalias() += v * v.transpose();
  }
  return acc / static_cast<double>(reps);
}

// Standard error of a Gaussian sample covariance entry.
double cov_se(const Eigen::MatrixXd& cov, int a, int b, int reps) {
  return std::sqrt((cov(a, a) * cov(b, b) + cov(a, b) * cov(a, b)) /
                   static_cast<double>(reps));
}

} // namespace

TEST_CASE("white increments at h = 1/2: mean, lag-1 correlation, variance") {
  const auto plan = ofbm::build_plan(diag_spec({0.5}), 4096);
  const auto path = ofbm::synthesize(plan, 2718);
  const Eigen::VectorXd x = increments(path.data.col(0));
  const double nu = 4096.0;

  const double mean = x.mean();
  CHECK(std::abs(mean) < 4.0 / std::sqrt(nu));

  const double var = x.squaredNorm() / nu - mean * mean;
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / nu));

  double lag1 = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) lag1 += (x(i) - mean) * (x(i + 1) - mean);
  lag1 /= (nu - 1.0) * var;
  CHECK(std::abs(lag1) < 4.0 / std::sqrt(nu));
}

TEST_CASE("synthesis is a pure function of plan and seed") {
  const auto plan = ofbm::build_plan(diag_spec({0.3, 0.8}), 512);
  const auto a = ofbm::synthesize(plan, 7);
  const auto b = ofbm::synthesize(plan, 7);
  CHECK((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
  const auto c = ofbm::synthesize(plan, 8);
  CHECK((a.data - c.data).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.seed == 7);
  CHECK(!a.spec_hash.empty());

  // A caller-supplied workspace must not change the draw.
  ofbm::SynthesisWorkspace workspace;
  const auto d = ofbm::synthesize(plan, 7, workspace);
  const auto e = ofbm::synthesize(plan, 8, workspace);
  CHECK((d.data - a.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK((e.data - c.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("plan construction is idempotent (bit-identical factors)") {
  OfbmSpec spec = diag_spec({0.3, 0.8});
  const auto p1 = ofbm::build_plan(spec, 1024);
  const auto p2 = ofbm::build_plan(spec, 1024);
  REQUIRE(p1.spectral_factors.size() == p2.spectral_factors.size());
  CHECK(p1.embed_len == 2048);
  for (std::size_t i = 0; i < p1.spectral_factors.size(); ++i) {
    REQUIRE(p1.spectral_factors[i] == p2.spectral_factors[i]);
  }
}

TEST_CASE("embedding length is the doubled next power of two") {
  CHECK(ofbm::build_plan(diag_spec({0.7}), 1000).embed_len == 2048);
  CHECK(ofbm::build_plan(diag_spec({0.7}), 1024).embed_len == 2048);
  CHECK(ofbm::build_plan(diag_spec({0.7}), 1025).embed_len == 4096);
}

TEST_CASE("sample covariance matches the exact covariance (independent case)") {
  const OfbmSpec spec = diag_spec({0.3, 0.8});
  const std::vector<std::int64_t> times = {64, 128, 256};
  const Eigen::MatrixXd exact = ofbm::exact_path_covariance(spec, times);

  const auto plan = ofbm::build_plan(spec, 512);
  const int reps = 2000;
  ofbm::SynthesisWorkspace workspace;
  const Eigen::MatrixXd sample =
      sample_covariance(times, 2, reps, [&](int r) {
        return ofbm::synthesize(plan, ofbm::mix_seed(1001, 512, r), workspace);
      });

  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      const double se = cov_se(exact, a, b, reps);
      CHECK(std::abs(sample(a, b) - exact(a, b)) <= 4.0 * se);
    }
  }
}

TEST_CASE("circulant and Cholesky generators agree in distribution") {
  OfbmSpec spec;
  spec.n = 2;
  spec.hurst = (Eigen::VectorXd(2) << 0.4, 0.7).finished();
  const double c = std::cos(0.7), s = std::sin(0.7);
  spec.mixing = (Eigen::MatrixXd(2, 2) << c, -s, s, c).finished();
  spec.premix_cov = (Eigen::MatrixXd(2, 2) << 1.0, 0.4, 0.4, 1.0).finished();
  ofbm::validate_spec(spec);

  const std::vector<std::int64_t> times = {16, 64, 128};
  const int reps = 2000;

  const auto plan = ofbm::build_plan(spec, 128);
  ofbm::SynthesisWorkspace workspace;
  const Eigen::MatrixXd s_circ =
      sample_covariance(times, 2, reps, [&](int r) {
        return ofbm::synthesize(plan, ofbm::mix_seed(21, 128, r), workspace);
      });

  const ofbm::CholeskyOracle oracle(spec, 128);
  const Eigen::MatrixXd s_chol =
      sample_covariance(times, 2, reps, [&](int r) {
        return oracle.draw(ofbm::mix_seed(22, 128, r));
      });

  const Eigen::MatrixXd exact = ofbm::exact_path_covariance(spec, times);
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      // Independent samples: the difference has twice the single-run variance.
      const double se = std::sqrt(2.0) * cov_se(exact, a, b, reps);
      CHECK(std::abs(s_circ(a, b) - s_chol(a, b)) <= 4.0 * se);
    }
  }
  // And both match the exact covariance directly.
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      const double se = cov_se(exact, a, b, reps);
      CHECK(std::abs(s_circ(a, b) - exact(a, b)) <= 4.0 * se);
      CHECK(std::abs(s_chol(a, b) - exact(a, b)) <= 4.0 * se);
    }
  }
}

TEST_CASE("Cholesky oracle: white increments and the size cap") {
  const auto path = ofbm::cholesky_oracle(diag_spec({0.5}), 512, 13);
  const Eigen::VectorXd x = increments(path.data.col(0));
  const double nu = 512.0;
  CHECK(std::abs(x.mean()) < 4.0 / std::sqrt(nu));
  CHECK(std::abs(x.squaredNorm() / nu - 1.0) < 4.0 * std::sqrt(2.0 / nu));

  CHECK_THROWS_AS(ofbm::cholesky_oracle(diag_spec({0.5}), 1025, 13),
                  ofbm::validation_error);
}

TEST_CASE("per-coordinate variance scales like t^{2h}") {
  const OfbmSpec spec = diag_spec({0.35, 0.75});
  const auto plan = ofbm::build_plan(spec, 256);
  const std::vector<std::int64_t> times = {16, 32, 64, 128, 256};
  const int reps = 5000;

  Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(5, 2);
  ofbm::SynthesisWorkspace workspace;
  for (int r = 0; r < reps; ++r) {
    const auto path = ofbm::synthesize(plan, ofbm::mix_seed(31415, 256, r), workspace);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      for (int q = 0; q < 2; ++q) {
        const double v = path.data(times[ti] - 1, q);
        second_moment(static_cast<int>(ti), q) += v * v;
      }
    }
  }
  second_moment /= static_cast<double>(reps);

  for (int q = 0; q < 2; ++q) {
    // Ordinary least squares of log Var(B(t)) on log t.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const double x = std::log2(static_cast<double>(times[ti]));
      const double y = std::log2(second_moment(static_cast<int>(ti), q));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = static_cast<double>(times.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(std::abs(slope - 2.0 * spec.hurst(q)) <= 0.05);
  }
}

TEST_CASE("univariate detail variance follows the 2h log-slope") {
  // Monte Carlo over 100 paths of length 2^16 at h = 0.7: the regression of
  // log2(mean squared normalized detail) on the octave has slope 2h +- 0.1.
  const OfbmSpec spec = diag_spec({0.7});
  const std::int64_t nu = 1 << 16;
  const auto plan = ofbm::build_plan(spec, nu);
  const auto bank = ofbm::make_bank(2, ofbm::WaveletVariant::least_asymmetric);
  const int j_lo = 4, j_hi = 10;
  const int reps = 100;

  std::vector<double> mean_sq(static_cast<std::size_t>(j_hi - j_lo + 1), 0.0);
  std::vector<std::int64_t> counts(mean_sq.size(), 0);
  ofbm::SynthesisWorkspace workspace;
  for (int r = 0; r < reps; ++r) {
    const auto path = ofbm::synthesize(plan, ofbm::mix_seed(999, nu, r), workspace);
    const auto coeffs = ofbm::pyramid(path, bank, j_hi);
    for (int j = j_lo; j <= j_hi; ++j) {
      const auto& level = coeffs[static_cast<std::size_t>(j - 1)];
      mean_sq[static_cast<std::size_t>(j - j_lo)] += level.coeffs.col(0).squaredNorm();
      counts[static_cast<std::size_t>(j - j_lo)] += level.k_count;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double y = std::log2(mean_sq[static_cast<std::size_t>(j - j_lo)] /
                               static_cast<double>(counts[static_cast<std::size_t>(j - j_lo)]));
    const double x = j;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = j_hi - j_lo + 1;
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(std::abs(slope - 1.4) <= 0.1);
}

TEST_CASE("inadmissible premix covariance fails loudly after retries") {
  OfbmSpec spec;
  spec.n = 2;
  spec.hurst = (Eigen::VectorXd(2) << 0.3, 0.9).finished();
  spec.mixing = Eigen::MatrixXd::Identity(2, 2);
  // A perfectly valid instantaneous covariance (eigenvalues 0.01 and 1.99),
  // but the near-unit coherence between coordinates with widely split
  // exponents produces spectral blocks with a large negative eigenvalue that
  // doubling the embedding does not cure.
  spec.premix_cov = (Eigen::MatrixXd(2, 2) << 1.0, 0.99, 0.99, 1.0).finished();
  ofbm::validate_spec(spec);
  try {
    ofbm::build_plan(spec, 256);
    FAIL("expected admissibility_error");
  } catch (const ofbm::admissibility_error& e) {
    const std::string what = e.what();
    CHECK(what.find("eigenvalue") != std::string::npos);
  }
}

TEST_CASE("nu below 2 is rejected") {
  CHECK_THROWS_AS(ofbm::build_plan(diag_spec({0.5}), 1), ofbm::validation_error);
}
