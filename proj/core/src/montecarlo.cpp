#include "ofbm/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "ofbm/errors.hpp"
#include "ofbm/rng.hpp"
#include "ofbm/synthesis.hpp"

namespace ofbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_power_of_two(std::int64_t x) { return x > 0 && (x & (x - 1)) == 0; }

// Rejection-sampled uniform index in [0, bound), free of modulo bias.
std::size_t uniform_index(Xoshiro256pp& rng, std::size_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng.next();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % bound);
}

enum class FailureKind { validation, numerical, io, other };

struct Failure {
  bool failed = false;
  FailureKind kind = FailureKind::other;
  std::string message;
};

[[noreturn]] void rethrow(const Failure& failure, std::int64_t nu, std::int64_t rep,
                          std::uint64_t seed) {
  const std::string context = "replication failed (nu = " + std::to_string(nu) +
                              ", rep = " + std::to_string(rep) + ", seed = " +
                              std::to_string(seed) + "): " + failure.message;
  switch (failure.kind) {
    case FailureKind::validation: throw validation_error(context);
    case FailureKind::io: throw io_error(context);
    default: throw numerical_error(context);
  }
}

McCell summarize_column(const Eigen::MatrixXd& raw, int q, double truth,
                        double level, int resamples, std::uint64_t ci_seed) {
  const Eigen::Index reps = raw.rows();
  McCell cell;
  const double mean = raw.col(q).mean();
  cell.mean = mean;
  cell.bias = mean - truth;
  if (reps < 2) {
    cell.stddev = kNaN;
    cell.skewness = kNaN;
    cell.excess_kurtosis = kNaN;
  } else {
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (Eigen::Index r = 0; r < reps; ++r) {
      const double d = raw(r, q) - mean;
      const double d2 = d * d;
      m2 += d2;
      m3 += d2 * d;
      m4 += d2 * d2;
    }
    const double inv = 1.0 / static_cast<double>(reps);
    const double var_unbiased = m2 / static_cast<double>(reps - 1);
    m2 *= inv;
    m3 *= inv;
    m4 *= inv;
    cell.stddev = std::sqrt(var_unbiased);
    cell.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : kNaN;
    cell.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : kNaN;
  }
  std::vector<double> samples(static_cast<std::size_t>(reps));
  for (Eigen::Index r = 0; r < reps; ++r) samples[static_cast<std::size_t>(r)] = raw(r, q);
  const auto ci = bootstrap_ci(samples, level, resamples, ci_seed);
  cell.ci_lo = ci.first;
  cell.ci_hi = ci.second;
  return cell;
}

double slope_log2std_vs_log2nu(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) return kNaN;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double count = static_cast<double>(points.size());
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return kNaN;
  return (count * sxy - sx * sy) / denom;
}

} // namespace

McSummary run_monte_carlo(const McConfig& config, int workers) {
  McConfig cfg = config;
  validate_spec(cfg.spec);
  if (cfg.reps < 1) throw validation_error("monte carlo: reps must be >= 1");
  if (cfg.nus.empty()) throw validation_error("monte carlo: no sample sizes given");
  for (std::size_t i = 0; i < cfg.nus.size(); ++i) {
    if (!is_power_of_two(cfg.nus[i])) {
      throw validation_error("monte carlo: sample sizes must be powers of two");
    }
    if (i > 0 && cfg.nus[i] <= cfg.nus[i - 1]) {
      throw validation_error("monte carlo: sample sizes must be strictly ascending");
    }
  }
  if (cfg.j1 < 1) throw validation_error("monte carlo: j1 must be >= 1");
  if (cfg.ci_level <= 0.0 || cfg.ci_level >= 1.0) {
    throw validation_error("monte carlo: ci_level must lie in (0, 1)");
  }
  if (workers < 1) workers = 1;

  const WaveletBank bank = make_bank(cfg.n_moments, cfg.variant);
  const int n = cfg.spec.n;
  const int reps = cfg.reps;

  McSummary summary;
  summary.n = n;
  summary.reps = reps;
  summary.base_seed = cfg.base_seed;

  for (const std::int64_t nu : cfg.nus) {
    McNuResult result;
    result.nu = nu;
    result.j1 = cfg.j1;
    result.j2 = cfg.j2 > 0 ? cfg.j2 : deepest_octave(nu, bank, n);
    if (result.j2 <= result.j1) {
      throw validation_error("monte carlo: octave range [" + std::to_string(result.j1) +
                             ", " + std::to_string(result.j2) + "] at nu = " +
                             std::to_string(nu) + " leaves no regression span; "
                             "reduce j1 or increase nu");
    }
    const std::vector<double> b =
        cfg.scalar_policy == ScalarPolicy::uniform
            ? uniform_scalars(result.j1, result.j2)
            : dyadic_scalars(result.j1, result.j2, nu);
    const RegressionWeights weights = make_weights(result.j1, result.j2, b);
    const SynthesisPlan plan = build_plan(cfg.spec, nu);

    result.raw_multivariate.resize(reps, n);
    result.raw_univariate.resize(reps, n);
    std::vector<Failure> failures(static_cast<std::size_t>(reps));

    std::atomic<int> next_rep{0};
    std::atomic<bool> stop{false};
    const auto worker_loop = [&]() {
      SynthesisWorkspace workspace;
      while (!stop.load(std::memory_order_relaxed)) {
        const int r = next_rep.fetch_add(1, std::memory_order_relaxed);
        if (r >= reps) break;
        Failure& failure = failures[static_cast<std::size_t>(r)];
        try {
          const std::uint64_t seed =
              mix_seed(cfg.base_seed, static_cast<std::uint64_t>(nu),
                       static_cast<std::uint64_t>(r));
          const SamplePath path = synthesize(plan, seed, workspace);
          const auto coeffs = pyramid(path, bank, result.j2);
          const WaveletSpectrum spectrum = compute_spectrum(coeffs);
          result.raw_multivariate.row(r) =
              estimate_multivariate(spectrum, weights).transpose();
          result.raw_univariate.row(r) =
              estimate_univariate(spectrum, weights).transpose();
        } catch (const validation_error& e) {
          failure = {true, FailureKind::validation, e.what()};
          stop.store(true, std::memory_order_relaxed);
        } catch (const io_error& e) {
          failure = {true, FailureKind::io, e.what()};
          stop.store(true, std::memory_order_relaxed);
        } catch (const std::exception& e) {
          failure = {true, FailureKind::numerical, e.what()};
          stop.store(true, std::memory_order_relaxed);
        }
      }
    };

    const int pool = std::min(workers, reps);
    if (pool <= 1) {
      worker_loop();
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(pool));
      for (int t = 0; t < pool; ++t) threads.emplace_back(worker_loop);
      for (std::thread& t : threads) t.join();
    }
    for (int r = 0; r < reps; ++r) {
      const Failure& failure = failures[static_cast<std::size_t>(r)];
      if (failure.failed) {
        rethrow(failure, nu, r,
                mix_seed(cfg.base_seed, static_cast<std::uint64_t>(nu),
                         static_cast<std::uint64_t>(r)));
      }
    }

    result.multivariate.resize(static_cast<std::size_t>(n));
    result.univariate.resize(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
      const double truth = cfg.spec.hurst[q];
      const std::uint64_t tag_multi =
          mix_seed(cfg.base_seed ^ 0x63695f626f6f7431ULL,
                   static_cast<std::uint64_t>(nu), static_cast<std::uint64_t>(q));
      const std::uint64_t tag_uni =
          mix_seed(cfg.base_seed ^ 0x63695f626f6f7432ULL,
                   static_cast<std::uint64_t>(nu), static_cast<std::uint64_t>(q));
      result.multivariate[static_cast<std::size_t>(q)] =
          summarize_column(result.raw_multivariate, q, truth, cfg.ci_level,
                           cfg.bootstrap_resamples, tag_multi);
      result.univariate[static_cast<std::size_t>(q)] =
          summarize_column(result.raw_univariate, q, truth, cfg.ci_level,
                           cfg.bootstrap_resamples, tag_uni);
    }
    result.cov_multivariate = cross_covariances(result.raw_multivariate);
    result.cov_univariate = cross_covariances(result.raw_univariate);
    summary.by_nu.push_back(std::move(result));
  }

  summary.std_slope_multivariate.resize(static_cast<std::size_t>(n), kNaN);
  summary.std_slope_univariate.resize(static_cast<std::size_t>(n), kNaN);
  for (int q = 0; q < n; ++q) {
    std::vector<std::pair<double, double>> pts_multi;
    std::vector<std::pair<double, double>> pts_uni;
    for (const McNuResult& result : summary.by_nu) {
      const double x = std::log2(static_cast<double>(result.nu));
      const double sm = result.multivariate[static_cast<std::size_t>(q)].stddev;
      const double su = result.univariate[static_cast<std::size_t>(q)].stddev;
      if (std::isfinite(sm) && sm > 0.0) pts_multi.emplace_back(x, std::log2(sm));
      if (std::isfinite(su) && su > 0.0) pts_uni.emplace_back(x, std::log2(su));
    }
    summary.std_slope_multivariate[static_cast<std::size_t>(q)] =
        slope_log2std_vs_log2nu(pts_multi);
    summary.std_slope_univariate[static_cast<std::size_t>(q)] =
        slope_log2std_vs_log2nu(pts_uni);
  }
  return summary;
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& samples,
                                       double level, int resamples,
                                       std::uint64_t seed) {
  if (level <= 0.0 || level >= 1.0) {
    throw validation_error("bootstrap_ci: level must lie in (0, 1)");
  }
  if (resamples < 1) {
    throw validation_error("bootstrap_ci: need at least one resample");
  }
  const std::size_t count = samples.size();
  if (count < 10) return {kNaN, kNaN};

  Xoshiro256pp rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      acc += samples[uniform_index(rng, count)];
    }
    means[static_cast<std::size_t>(b)] = acc / static_cast<double>(count);
  }
  std::sort(means.begin(), means.end());
  const auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(means.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };
  const double alpha = (1.0 - level) / 2.0;
  return {quantile(alpha), quantile(1.0 - alpha)};
}

Eigen::MatrixXd cross_covariances(const Eigen::MatrixXd& estimates) {
  const Eigen::Index reps = estimates.rows();
  const Eigen::Index n = estimates.cols();
  if (reps < 2) {
    return Eigen::MatrixXd::Constant(n, n, kNaN);
  }
  const Eigen::RowVectorXd mean = estimates.colwise().mean();
  const Eigen::MatrixXd centered = estimates.rowwise() - mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(
      centered.transpose(), 1.0 / static_cast<double>(reps - 1));
  cov.triangularView<Eigen::StrictlyUpper>() =
      cov.transpose().triangularView<Eigen::StrictlyUpper>();
  return cov;
}

} // namespace ofbm
