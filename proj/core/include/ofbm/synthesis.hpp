#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "ofbm/fft.hpp"
#include "ofbm/model.hpp"

namespace ofbm {

// Precomputed state for exact circulant-embedding synthesis: per Fourier
// frequency l = 0..embed_len/2 a real n x n factor S_l with S_l S_l^T equal
// to the spectral block of the embedded increment covariance (frequencies
// above embed_len/2 mirror their counterparts).  Immutable and shareable
// across threads; one plan serves any number of replications.
struct SynthesisPlan {
  OfbmSpec spec;
  std::int64_t nu = 0;
  std::size_t embed_len = 0;
  std::vector<double> spectral_factors;  // (embed_len/2 + 1) column-major n x n blocks
  std::shared_ptr<const FftPlan> fft;
  std::string spec_hash;
};

// Reusable per-thread buffers for synthesize(); avoids reallocating the
// frequency-domain arrays on every replication.
struct SynthesisWorkspace {
  std::vector<std::vector<std::complex<double>>> freq;
  std::vector<double> gauss;
};

// Builds the synthesis plan.  The embedding length starts at the smallest
// power of two >= 2 * nu and doubles up to 3 times if the embedded
// covariance fails the admissibility test, after which admissibility_error
// is thrown with the worst frequency/eigenvalue diagnostic.
SynthesisPlan build_plan(const OfbmSpec& spec, std::int64_t nu);

// Draws one exact sample path.  Deterministic function of (plan, seed);
// independent of thread scheduling.
SamplePath synthesize(const SynthesisPlan& plan, std::uint64_t seed);
SamplePath synthesize(const SynthesisPlan& plan, std::uint64_t seed,
                      SynthesisWorkspace& workspace);

// Brute-force O((nu n)^3) generator that factors the full joint covariance
// at times 1..nu.  Independent of the circulant path; intended for test
// equivalence at small sizes (nu <= 1024).
class CholeskyOracle {
public:
  CholeskyOracle(const OfbmSpec& spec, std::int64_t nu);
  SamplePath draw(std::uint64_t seed) const;
  std::int64_t nu() const { return nu_; }

private:
  OfbmSpec spec_;
  std::int64_t nu_;
  Eigen::MatrixXd factor_;  // lower-triangular-like factor F with F F^T = cov
  std::string spec_hash_;
};

// One-shot convenience wrapper around CholeskyOracle.
SamplePath cholesky_oracle(const OfbmSpec& spec, std::int64_t nu, std::uint64_t seed);

} // namespace ofbm
