// Benchmarks for the hot paths: synthesis plan construction, per-replication
// path drawing, the filter-bank cascade, and spectrum + regression.
#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "ofbm/estimator.hpp"
#include "ofbm/model.hpp"
#include "ofbm/rng.hpp"
#include "ofbm/spectrum.hpp"
#include "ofbm/synthesis.hpp"
#include "ofbm/wavelet.hpp"

namespace {

ofbm::OfbmSpec bench_spec(int n) {
  ofbm::OfbmSpec spec;
  spec.n = n;
  spec.hurst.resize(n);
  for (int q = 0; q < n; ++q) {
    spec.hurst(q) = 0.3 + 0.6 * static_cast<double>(q) / std::max(1, n - 1);
  }
  Eigen::MatrixXd mixing = Eigen::MatrixXd::Identity(n, n);
  for (int q = 0; q + 1 < n; ++q) {
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
    const double angle = 0.4 + 0.1 * q;
    rot(q, q) = std::cos(angle);
    rot(q + 1, q + 1) = std::cos(angle);
    rot(q, q + 1) = -std::sin(angle);
    rot(q + 1, q) = std::sin(angle);
    mixing = rot * mixing;
  }
  spec.mixing = mixing;
  spec.premix_cov = Eigen::MatrixXd::Identity(n, n);
  ofbm::validate_spec(spec);
  return spec;
}

void bm_build_plan(benchmark::State& state) {
  const auto spec = bench_spec(static_cast<int>(state.range(0)));
  const std::int64_t nu = state.range(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ofbm::build_plan(spec, nu));
  }
  state.SetComplexityN(nu);
}

void bm_synthesize(benchmark::State& state) {
  const auto spec = bench_spec(static_cast<int>(state.range(0)));
  const std::int64_t nu = state.range(1);
  const auto plan = ofbm::build_plan(spec, nu);
  ofbm::SynthesisWorkspace workspace;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ofbm::synthesize(plan, seed++, workspace));
  }
  state.SetItemsProcessed(state.iterations() * nu);
}

void bm_pyramid(benchmark::State& state) {
  const auto spec = bench_spec(static_cast<int>(state.range(0)));
  const std::int64_t nu = state.range(1);
  const auto plan = ofbm::build_plan(spec, nu);
  const auto path = ofbm::synthesize(plan, 7);
  const auto bank = ofbm::make_bank(2, ofbm::WaveletVariant::least_asymmetric);
  const int j2 = ofbm::deepest_octave(nu, bank, spec.n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ofbm::pyramid(path, bank, j2));
  }
  state.SetItemsProcessed(state.iterations() * nu);
}

void bm_spectrum_and_estimate(benchmark::State& state) {
  const auto spec = bench_spec(static_cast<int>(state.range(0)));
  const std::int64_t nu = state.range(1);
  const auto plan = ofbm::build_plan(spec, nu);
  const auto path = ofbm::synthesize(plan, 7);
  const auto bank = ofbm::make_bank(2, ofbm::WaveletVariant::least_asymmetric);
  const int j2 = ofbm::deepest_octave(nu, bank, spec.n);
  const int j1 = std::max(1, j2 - 6);
  const auto coeffs = ofbm::pyramid(path, bank, j2);
  const auto weights =
      ofbm::make_weights(j1, j2, ofbm::dyadic_scalars(j1, j2, nu));
  for (auto _ : state) {
    const auto spectrum = ofbm::compute_spectrum(coeffs);
    benchmark::DoNotOptimize(ofbm::estimate_multivariate(spectrum, weights));
  }
}

} // namespace

BENCHMARK(bm_build_plan)
    ->Args({2, 1 << 12})
    ->Args({2, 1 << 16})
    ->Args({6, 1 << 14})
    ->Unit(benchmark::kMillisecond);

BENCHMARK(bm_synthesize)
    ->Args({2, 1 << 12})
    ->Args({2, 1 << 16})
    ->Args({6, 1 << 14})
    ->Args({6, 1 << 18})
    ->Unit(benchmark::kMillisecond);

BENCHMARK(bm_pyramid)
    ->Args({2, 1 << 16})
    ->Args({6, 1 << 14})
    ->Args({6, 1 << 18})
    ->Unit(benchmark::kMillisecond);

BENCHMARK(bm_spectrum_and_estimate)
    ->Args({2, 1 << 16})
    ->Args({6, 1 << 14})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
