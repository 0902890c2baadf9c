#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofbm/errors.hpp"
#include "ofbm/estimator.hpp"
#include "ofbm/model.hpp"
#include "ofbm/rng.hpp"
#include "ofbm/spectrum.hpp"
#include "ofbm/synthesis.hpp"
#include "ofbm/wavelet.hpp"

using ofbm::RegressionWeights;
using ofbm::WaveletSpectrum;

namespace {

// Spectrum whose eigenvalues follow exact per-component power laws
// lambda_q(2^j) = c_q * 2^{2 h_q j} with diagonal W (so the diagonal entries
// follow the same laws).
WaveletSpectrum power_law_spectrum(const std::vector<double>& hurst,
                                   const std::vector<double>& amplitudes,
                                   int j1, int j2) {
  const int n = static_cast<int>(hurst.size());
  WaveletSpectrum spectrum;
  spectrum.n = n;
  for (int j = j1; j <= j2; ++j) {
    ofbm::OctaveSpectrum oct;
    oct.octave = j;
    oct.k_count = std::int64_t(1) << std::max(1, 20 - j);
    Eigen::VectorXd lams(n);
    for (int q = 0; q < n; ++q) {
      lams(q) = amplitudes[q] * std::pow(2.0, 2.0 * hurst[q] * j);
    }
    oct.w = lams.asDiagonal();
    oct.eigvals = lams;
    oct.eigvecs = Eigen::MatrixXd::Identity(n, n);
    oct.diag_log2 = lams.array().log2();
    spectrum.octaves.push_back(oct);
  }
  return spectrum;
}

WaveletSpectrum real_spectrum(std::uint64_t seed, int j_max) {
  ofbm::OfbmSpec spec;
  spec.n = 2;
  spec.hurst = (Eigen::VectorXd(2) << 0.4, 0.8).finished();
  const double c = std::cos(0.5), s = std::sin(0.5);
  spec.mixing = (Eigen::MatrixXd(2, 2) << c, -s, s, c).finished();
  spec.premix_cov = Eigen::MatrixXd::Identity(2, 2);
  ofbm::validate_spec(spec);
  const auto plan = ofbm::build_plan(spec, 8192);
  const auto path = ofbm::synthesize(plan, seed);
  const auto bank = ofbm::make_bank(2, ofbm::WaveletVariant::least_asymmetric);
  return ofbm::compute_spectrum(ofbm::pyramid(path, bank, j_max));
}

} // namespace

TEST_CASE("weights: closed forms for short ranges") {
  const RegressionWeights two = ofbm::make_weights(1, 2, ofbm::uniform_scalars(1, 2));
  REQUIRE(two.w.size() == 2);
  CHECK(two.w[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(two.w[1] == doctest::Approx(1.0).epsilon(1e-14));

  const RegressionWeights three = ofbm::make_weights(1, 3, ofbm::uniform_scalars(1, 3));
  REQUIRE(three.w.size() == 3);
  CHECK(three.w[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(three.w[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(three.w[2] == doctest::Approx(0.5).epsilon(1e-14));

  // b_j = nu / 2^j at nu = 32: b = (16, 8, 4) over j = 1..3.
  const RegressionWeights dyadic = ofbm::make_weights(1, 3, ofbm::dyadic_scalars(1, 3, 32));
  REQUIRE(dyadic.b.size() == 3);
  CHECK(dyadic.b[0] == doctest::Approx(16.0).epsilon(1e-15));
  CHECK(dyadic.b[1] == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(dyadic.b[2] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(dyadic.w[0] == doctest::Approx(-8.0 / 13.0).epsilon(1e-14));
  CHECK(dyadic.w[1] == doctest::Approx(3.0 / 13.0).epsilon(1e-14));
  CHECK(dyadic.w[2] == doctest::Approx(5.0 / 13.0).epsilon(1e-14));
}

TEST_CASE("weights satisfy both constraints for arbitrary valid scalars") {
  ofbm::Xoshiro256pp rng(321);
  for (int trial = 0; trial < 50; ++trial) {
    const int j1 = 1 + static_cast<int>(rng.next() % 6);
    const int j2 = j1 + 1 + static_cast<int>(rng.next() % 10);
    std::vector<double> b(static_cast<std::size_t>(j2 - j1 + 1));
    for (auto& v : b) v = rng.uniform01() * 10.0;
    const RegressionWeights weights = ofbm::make_weights(j1, j2, b);
    double sum = 0.0, jsum = 0.0;
    for (int j = j1; j <= j2; ++j) {
      sum += weights.w[static_cast<std::size_t>(j - j1)];
      jsum += j * weights.w[static_cast<std::size_t>(j - j1)];
    }
    CHECK(std::abs(sum) <= 1e-12);
    CHECK(std::abs(jsum - 1.0) <= 1e-12);
  }
}

TEST_CASE("weights reject degenerate inputs") {
  CHECK_THROWS_AS(ofbm::make_weights(3, 3, {1.0}), ofbm::validation_error);
  CHECK_THROWS_AS(ofbm::make_weights(3, 2, {1.0, 1.0}), ofbm::validation_error);
  // All mass on one octave: V0 V2 - V1^2 = 0.
  CHECK_THROWS_AS(ofbm::make_weights(1, 3, {0.0, 5.0, 0.0}), ofbm::validation_error);
  CHECK_THROWS_AS(ofbm::make_weights(1, 3, {1.0, -0.5, 1.0}), ofbm::validation_error);
  CHECK_THROWS_AS(ofbm::make_weights(1, 2, {1.0}), ofbm::validation_error);
}

TEST_CASE("exact power laws are recovered exactly, for every weight choice") {
  const std::vector<double> hurst = {0.3, 0.55, 0.9};
  const std::vector<double> amplitudes = {0.7, 1.3, 2.9};
  const WaveletSpectrum spectrum = power_law_spectrum(hurst, amplitudes, 2, 9);

  const std::vector<std::vector<double>> scalar_choices = {
      ofbm::uniform_scalars(2, 9),
      ofbm::dyadic_scalars(2, 9, 1 << 16),
      {8.0, 1.0, 3.0, 0.5, 2.0, 7.0, 1.5, 4.0},
  };
  for (const auto& b : scalar_choices) {
    const RegressionWeights weights = ofbm::make_weights(2, 9, b);
    const Eigen::VectorXd multi = ofbm::estimate_multivariate(spectrum, weights);
    const Eigen::VectorXd uni = ofbm::estimate_univariate(spectrum, weights);
    for (int q = 0; q < 3; ++q) {
      CHECK(std::abs(multi(q) - hurst[q]) <= 1e-10);
      CHECK(std::abs(uni(q) - hurst[q]) <= 1e-10);
    }
  }
}

TEST_CASE("power-law recovery is independent of the amplitudes") {
  const std::vector<double> hurst = {0.42, 0.77};
  const WaveletSpectrum a = power_law_spectrum(hurst, {1.0, 1.0}, 1, 6);
  const WaveletSpectrum b = power_law_spectrum(hurst, {123.0, 4.5e-4}, 1, 6);
  const RegressionWeights weights = ofbm::make_weights(1, 6, ofbm::uniform_scalars(1, 6));
  const Eigen::VectorXd ha = ofbm::estimate_multivariate(a, weights);
  const Eigen::VectorXd hb = ofbm::estimate_multivariate(b, weights);
  CHECK(std::abs(ha(0) - hb(0)) <= 1e-10);
  CHECK(std::abs(ha(1) - hb(1)) <= 1e-10);
}

TEST_CASE("nonpositive eigenvalue inside the range is an error naming (j, q)") {
  WaveletSpectrum spectrum = power_law_spectrum({0.5, 0.7}, {1.0, 1.0}, 1, 5);
  spectrum.octaves[2].eigvals(0) = 0.0;  // octave 3, component 1
  const RegressionWeights weights = ofbm::make_weights(1, 5, ofbm::uniform_scalars(1, 5));
  try {
    ofbm::estimate_multivariate(spectrum, weights);
    FAIL("expected numerical_error");
  } catch (const ofbm::numerical_error& e) {
    const std::string what = e.what();
    CHECK(what.find("3") != std::string::npos);
    CHECK(what.find("1") != std::string::npos);
  }
  // The univariate path keys off the diagonal instead.
  WaveletSpectrum diag_bad = power_law_spectrum({0.5, 0.7}, {1.0, 1.0}, 1, 5);
  diag_bad.octaves[4].w(1, 1) = 0.0;
  diag_bad.octaves[4].diag_log2(1) = std::log2(0.0);
  CHECK_THROWS_AS(ofbm::estimate_univariate(diag_bad, weights), ofbm::numerical_error);
}

TEST_CASE("out-of-range octaves are rejected") {
  const WaveletSpectrum spectrum = power_law_spectrum({0.5}, {1.0}, 3, 6);
  CHECK_THROWS_AS(
      ofbm::estimate_multivariate(spectrum, ofbm::make_weights(2, 6, ofbm::uniform_scalars(2, 6))),
      ofbm::validation_error);
  CHECK_THROWS_AS(
      ofbm::estimate_multivariate(spectrum, ofbm::make_weights(3, 7, ofbm::uniform_scalars(3, 7))),
      ofbm::validation_error);
}

TEST_CASE("amplitude invariance on a synthesized spectrum") {
  const WaveletSpectrum spectrum = real_spectrum(11, 8);
  const RegressionWeights weights = ofbm::make_weights(2, 8, ofbm::dyadic_scalars(2, 8, 8192));
  const auto base = ofbm::estimate(spectrum, weights);

  for (double c : {3.7e-3, 41.0}) {
    WaveletSpectrum scaled = spectrum;
    for (auto& oct : scaled.octaves) {
      oct.w *= c * c;
      oct.eigvals *= c * c;
      oct.diag_log2 = oct.w.diagonal().array().log2();
    }
    const auto other = ofbm::estimate(scaled, weights);
    for (int q = 0; q < 2; ++q) {
      CHECK(std::abs(other.h_multivariate(q) - base.h_multivariate(q)) <= 1e-10);
      CHECK(std::abs(other.h_univariate(q) - base.h_univariate(q)) <= 1e-10);
    }
  }
}

TEST_CASE("one-component estimates coincide bit-for-bit") {
  ofbm::OfbmSpec spec;
  spec.n = 1;
  spec.hurst = Eigen::VectorXd::Constant(1, 0.7);
  spec.mixing = Eigen::MatrixXd::Identity(1, 1);
  spec.premix_cov = Eigen::MatrixXd::Identity(1, 1);
  ofbm::validate_spec(spec);
  const auto path = ofbm::synthesize(ofbm::build_plan(spec, 4096), 5);
  const auto bank = ofbm::make_bank(2, ofbm::WaveletVariant::least_asymmetric);
  const auto spectrum = ofbm::compute_spectrum(ofbm::pyramid(path, bank, 7));
  const RegressionWeights weights = ofbm::make_weights(1, 7, ofbm::dyadic_scalars(1, 7, 4096));
  const auto estimates = ofbm::estimate(spectrum, weights);
  CHECK(estimates.h_multivariate(0) == estimates.h_univariate(0));
}

TEST_CASE("residuals vanish on exact power laws and are scalar-orthogonal") {
  const WaveletSpectrum exact = power_law_spectrum({0.35, 0.8}, {2.0, 0.3}, 2, 8);
  const RegressionWeights weights = ofbm::make_weights(2, 8, ofbm::dyadic_scalars(2, 8, 4096));
  const auto estimates = ofbm::estimate(exact, weights);
  CHECK(estimates.residuals_multivariate.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(estimates.residuals_univariate.cwiseAbs().maxCoeff() <= 1e-9);

  // On a noisy spectrum the b-weighted residual sums vanish by construction
  // of the fitted intercept.
  const WaveletSpectrum noisy = real_spectrum(17, 8);
  const auto fit = ofbm::estimate(noisy, weights);
  for (int q = 0; q < 2; ++q) {
    double acc_m = 0.0, acc_u = 0.0;
    for (int j = 2; j <= 8; ++j) {
      acc_m += weights.b[static_cast<std::size_t>(j - 2)] *
               fit.residuals_multivariate(q, j - 2);
      acc_u += weights.b[static_cast<std::size_t>(j - 2)] *
               fit.residuals_univariate(q, j - 2);
    }
    CHECK(std::abs(acc_m) <= 1e-10 * weights.b[0]);
    CHECK(std::abs(acc_u) <= 1e-10 * weights.b[0]);
  }
}

TEST_CASE("median across one spectrum reduces to the plain estimate") {
  const WaveletSpectrum spectrum = real_spectrum(23, 8);
  const RegressionWeights weights = ofbm::make_weights(2, 8, ofbm::uniform_scalars(2, 8));
  const auto plain = ofbm::estimate(spectrum, weights);
  const auto medianed = ofbm::median_estimate({spectrum}, weights);
  CHECK(medianed.h_multivariate(0) == plain.h_multivariate(0));
  CHECK(medianed.h_multivariate(1) == plain.h_multivariate(1));
  CHECK(medianed.h_univariate(0) == plain.h_univariate(0));
  CHECK(medianed.h_univariate(1) == plain.h_univariate(1));
  CHECK(medianed.subtraces == 1);
}

TEST_CASE("median of identical spectra equals the single-spectrum estimate") {
  const WaveletSpectrum spectrum = real_spectrum(29, 7);
  const RegressionWeights weights = ofbm::make_weights(1, 7, ofbm::uniform_scalars(1, 7));
  const auto plain = ofbm::estimate(spectrum, weights);
  const std::vector<WaveletSpectrum> copies(16, spectrum);
  const auto medianed = ofbm::median_estimate(copies, weights);
  for (int q = 0; q < 2; ++q) {
    CHECK(medianed.h_multivariate(q) == doctest::Approx(plain.h_multivariate(q)).epsilon(1e-14));
    CHECK(medianed.h_univariate(q) == doctest::Approx(plain.h_univariate(q)).epsilon(1e-14));
  }
  CHECK(medianed.subtraces == 16);
}

TEST_CASE("median is immune to one corrupted subtrace, mean of logs is not") {
  // Five identical exact-power-law spectra; corrupt one by a huge factor at
  // every octave.  The median of five equal-but-one values is the clean
  // value, so the estimate must not move at all.
  const std::vector<double> hurst = {0.4, 0.8};
  const WaveletSpectrum clean = power_law_spectrum(hurst, {1.0, 1.0}, 2, 7);
  std::vector<WaveletSpectrum> spectra(5, clean);
  for (auto& oct : spectra[3].octaves) {
    oct.w *= 1024.0;
    oct.eigvals *= 1024.0;
    oct.diag_log2 = oct.w.diagonal().array().log2();
  }
  const RegressionWeights weights = ofbm::make_weights(2, 7, ofbm::uniform_scalars(2, 7));
  const auto medianed = ofbm::median_estimate(spectra, weights);
  for (int q = 0; q < 2; ++q) {
    CHECK(std::abs(medianed.h_multivariate(q) - hurst[q]) <= 1e-10);
    CHECK(std::abs(medianed.h_univariate(q) - hurst[q]) <= 1e-10);
  }
}

TEST_CASE("median rejects mismatched subtrace grids") {
  const WaveletSpectrum a = real_spectrum(31, 8);
  const WaveletSpectrum b = real_spectrum(37, 6);
  const RegressionWeights weights = ofbm::make_weights(2, 8, ofbm::uniform_scalars(2, 8));
  CHECK_THROWS_AS(ofbm::median_estimate({a, b}, weights), ofbm::validation_error);
  CHECK_THROWS_AS(ofbm::median_estimate({}, weights), ofbm::validation_error);
}

TEST_CASE("interleaved subtraces pick strided rows and drop the remainder") {
  Eigen::MatrixXd data(18, 2);
  for (int i = 0; i < 18; ++i) {
    data(i, 0) = i;
    data(i, 1) = 100 + i;
  }
  ofbm::SamplePath path;
  path.data = data;
  path.nu = 18;
  const auto subs = ofbm::interleave_subtraces(path, 4);
  REQUIRE(subs.size() == 4);
  for (int s = 0; s < 4; ++s) {
    REQUIRE(subs[s].nu == 4);  // 18 / 4 = 4 full strides, remainder dropped
    for (int k = 0; k < 4; ++k) {
      CHECK(subs[s].data(k, 0) == double(s + 4 * k));
      CHECK(subs[s].data(k, 1) == double(100 + s + 4 * k));
    }
  }
  CHECK_THROWS_AS(ofbm::interleave_subtraces(path, 0), ofbm::validation_error);
  CHECK_THROWS_AS(ofbm::interleave_subtraces(path, 19), ofbm::validation_error);
}
