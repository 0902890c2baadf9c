#include "ofbm/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ofbm/errors.hpp"

namespace ofbm {

namespace {

using CLD = std::complex<long double>;

// Binomial-coefficient half-band polynomial
//   P(y) = sum_{k=0}^{N-1} binom(N-1+k, k) y^k,
// whose spectral factorization yields the Daubechies filters.
std::vector<long double> halfband_polynomial(int n_moments) {
  const int deg = n_moments - 1;
  std::vector<long double> coeff(deg + 1);
  long double c = 1.0L;  // binom(N-1, 0)
  coeff[0] = c;
  for (int k = 1; k <= deg; ++k) {
    c = c * static_cast<long double>(n_moments - 1 + k) / static_cast<long double>(k);
    coeff[k] = c;
  }
  return coeff;
}

CLD poly_eval(const std::vector<long double>& coeff, CLD y) {
  CLD acc = 0.0L;
  for (std::size_t i = coeff.size(); i-- > 0;) acc = acc * y + coeff[i];
  return acc;
}

CLD poly_eval_deriv(const std::vector<long double>& coeff, CLD y) {
  CLD acc = 0.0L;
  for (std::size_t i = coeff.size(); i-- > 1;) {
    acc = acc * y + coeff[i] * static_cast<long double>(i);
  }
  return acc;
}

// Roots of the half-band polynomial: companion-matrix eigenvalues in double
// precision, polished by complex Newton iterations in long double.
std::vector<CLD> halfband_roots(int n_moments) {
  const std::vector<long double> coeff = halfband_polynomial(n_moments);
  const int deg = n_moments - 1;
  if (deg == 0) return {};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) {
    companion(i, deg - 1) =
        -static_cast<double>(coeff[i] / coeff[deg]);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion);
  if (es.info() != Eigen::Success) {
    throw numerical_error("make_bank: companion eigensolve failed");
  }

  std::vector<CLD> roots(deg);
  for (int i = 0; i < deg; ++i) {
    CLD y(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
    for (int it = 0; it < 60; ++it) {
      const CLD f = poly_eval(coeff, y);
      const CLD fp = poly_eval_deriv(coeff, y);
      if (std::abs(fp) == 0.0L) break;
      const CLD step = f / fp;
      y -= step;
      if (std::abs(step) <= 1e-19L * (1.0L + std::abs(y))) break;
    }
    if (std::abs(y.imag()) <= 1e-12L * (1.0L + std::abs(y.real()))) {
      y = CLD(y.real(), 0.0L);
    }
    roots[i] = y;
  }
  std::sort(roots.begin(), roots.end(), [](const CLD& a, const CLD& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

// Maps a half-band root y to the z-plane factor z^2 - (2 - 4y) z + 1 and
// returns the root inside the unit circle; the partner root is 1/z.
CLD inside_z_root(CLD y) {
  const CLD b = CLD(2.0L, 0.0L) - 4.0L * y;
  const CLD disc = std::sqrt(b * b - CLD(4.0L, 0.0L));
  const CLD z1 = (b + disc) / 2.0L;
  const CLD z2 = (b - disc) / 2.0L;
  CLD inside = (std::abs(z1) < std::abs(z2)) ? z1 : z2;
  if (std::abs(inside.imag()) <= 1e-18L * (1.0L + std::abs(inside.real()))) {
    inside = CLD(inside.real(), 0.0L);
  }
  return inside;
}

void multiply_linear(std::vector<long double>& poly, long double root) {
  // poly(z) *= (z - root); coefficients in ascending powers.
  poly.push_back(0.0L);
  for (std::size_t i = poly.size() - 1; i > 0; --i) {
    poly[i] = poly[i - 1] - root * poly[i];
  }
  poly[0] = -root * poly[0];
}

void multiply_quadratic(std::vector<long double>& poly, CLD root) {
  // poly(z) *= (z - root)(z - conj(root)) = z^2 - 2 Re(root) z + |root|^2.
  const long double b = -2.0L * root.real();
  const long double c = root.real() * root.real() + root.imag() * root.imag();
  std::vector<long double> out(poly.size() + 2, 0.0L);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    out[i] += poly[i] * c;
    out[i + 1] += poly[i] * b;
    out[i + 2] += poly[i];
  }
  poly.swap(out);
}

// Assembles the lowpass taps from a conjugate-closed z-root selection
// (one root per reciprocal pair): expand (1+z)^N * prod(z - z_r), reverse
// the coefficient order so that the minimum-phase choice matches the
// classic Daubechies tap convention, and normalize the sum to sqrt(2).
std::vector<double> taps_from_roots(int n_moments, const std::vector<CLD>& z_roots) {
  std::vector<long double> poly{1.0L};
  for (int i = 0; i < n_moments; ++i) multiply_linear(poly, -1.0L);
  std::size_t i = 0;
  while (i < z_roots.size()) {
    if (z_roots[i].imag() == 0.0L) {
      multiply_linear(poly, z_roots[i].real());
      i += 1;
    } else {
      multiply_quadratic(poly, z_roots[i]);
      i += 2;  // conjugate partner is adjacent and absorbed by the quadratic
    }
  }
  long double sum = 0.0L;
  for (long double c : poly) sum += c;
  const long double scale = std::numbers::sqrt2_v<long double> / sum;
  std::vector<double> taps(poly.size());
  for (std::size_t k = 0; k < poly.size(); ++k) {
    taps[k] = static_cast<double>(poly[poly.size() - 1 - k] * scale);
  }
  return taps;
}

// L2 deviation of the filter's unwrapped phase from the linear-phase
// reference -omega (L-1)/2, over a uniform frequency grid.
double phase_nonlinearity(const std::vector<double>& taps) {
  const int grid = 1024;
  const std::size_t len = taps.size();
  double prev_phase = 0.0;  // H(0) = sqrt(2) > 0
  double offset = 0.0;
  double acc = 0.0;
  for (int m = 1; m < grid; ++m) {
    const double omega = std::numbers::pi * static_cast<double>(m) / grid;
    std::complex<double> h = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      h += taps[k] * std::polar(1.0, -omega * static_cast<double>(k));
    }
    if (std::abs(h) < 1e-9) continue;  // near the H(pi) = 0 zero, phase is ill-defined
    double phase = std::arg(h) + offset;
    while (phase - prev_phase > std::numbers::pi) {
      phase -= 2.0 * std::numbers::pi;
      offset -= 2.0 * std::numbers::pi;
    }
    while (phase - prev_phase < -std::numbers::pi) {
      phase += 2.0 * std::numbers::pi;
      offset += 2.0 * std::numbers::pi;
    }
    prev_phase = phase;
    const double dev = phase + omega * static_cast<double>(len - 1) / 2.0;
    acc += dev * dev;
  }
  return acc;
}

} // namespace

WaveletBank make_bank(int n_moments, WaveletVariant variant) {
  if (n_moments < 1 || n_moments > 10) {
    throw validation_error("make_bank: n_moments must be between 1 and 10");
  }
  WaveletBank bank;
  bank.n_moments = n_moments;
  bank.variant = variant;

  if (n_moments == 1) {
    const double v = 1.0 / std::numbers::sqrt2;
    bank.lowpass = {v, v};
  } else {
    const std::vector<CLD> y_roots = halfband_roots(n_moments);

    // Group the half-band roots into selection units: a real root offers a
    // real reciprocal z-pair; a conjugate pair of complex roots offers a
    // conjugate-closed quadruple.  Each unit contributes one binary choice
    // (inside vs outside the unit circle).
    struct Unit {
      CLD inside;  // representative inside root (imag >= 0)
      bool complex_pair;
    };
    std::vector<Unit> units;
    for (const CLD& y : y_roots) {
      if (y.imag() < 0.0L) continue;  // conjugate partner of an imag > 0 root
      Unit u;
      u.complex_pair = y.imag() > 0.0L;
      u.inside = inside_z_root(y);
      if (u.complex_pair && u.inside.imag() < 0.0L) {
        u.inside = std::conj(u.inside);
      }
      units.push_back(u);
    }

    const auto selection_roots = [&](unsigned mask) {
      std::vector<CLD> roots;
      for (std::size_t p = 0; p < units.size(); ++p) {
        CLD z = units[p].inside;
        if (mask & (1u << p)) z = CLD(1.0L, 0.0L) / z;  // take the outside partner
        if (units[p].complex_pair) {
          if (std::abs(z.imag()) <= 1e-18L * (1.0L + std::abs(z.real()))) {
            z = CLD(z.real(), 0.0L);
          }
          roots.push_back(z);
          roots.push_back(std::conj(z));
        } else {
          roots.push_back(CLD(z.real(), 0.0L));
        }
      }
      return roots;
    };

    if (variant == WaveletVariant::extremal_phase) {
      bank.lowpass = taps_from_roots(n_moments, selection_roots(0));
    } else {
      double best_metric = 0.0;
      std::vector<double> best_taps;
      const unsigned combos = 1u << units.size();
      for (unsigned mask = 0; mask < combos; ++mask) {
        std::vector<double> taps = taps_from_roots(n_moments, selection_roots(mask));
        const double metric = phase_nonlinearity(taps);
        if (best_taps.empty() || metric < best_metric) {
          best_metric = metric;
          best_taps = std::move(taps);
        }
      }
      bank.lowpass = std::move(best_taps);
    }
  }

  const std::size_t len = bank.lowpass.size();
  bank.highpass.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    bank.highpass[k] = sign * bank.lowpass[len - 1 - k];
  }
  return bank;
}

std::int64_t coefficient_count(std::int64_t nu, int n_moments, int octave) {
  if (octave < 0) throw validation_error("coefficient_count: octave must be >= 0");
  const std::int64_t len = 2 * static_cast<std::int64_t>(n_moments);
  std::int64_t count = nu;
  for (int j = 0; j < octave; ++j) {
    if (count < len) return 0;
    count = (count - len) / 2 + 1;
  }
  return std::max<std::int64_t>(count, 0);
}

std::vector<OctaveCoefficients> pyramid(const SamplePath& path,
                                        const WaveletBank& bank, int j_max) {
  if (j_max < 1) throw validation_error("pyramid: j_max must be >= 1");
  if (path.data.rows() != path.nu || path.data.cols() < 1) {
    throw validation_error("pyramid: malformed sample path");
  }
  if (!path.data.allFinite()) {
    throw validation_error("pyramid: sample path contains non-finite entries");
  }
  if (coefficient_count(path.nu, bank.n_moments, j_max) < 1) {
    int deepest = 0;
    while (coefficient_count(path.nu, bank.n_moments, deepest + 1) >= 1) ++deepest;
    throw validation_error("pyramid: octave " + std::to_string(j_max) +
                           " too deep for " + std::to_string(path.nu) +
                           " samples; deepest feasible octave is " +
                           std::to_string(deepest));
  }

  const int n = static_cast<int>(path.data.cols());
  const std::int64_t len = 2 * static_cast<std::int64_t>(bank.n_moments);
  const double* h = bank.lowpass.data();
  const double* g = bank.highpass.data();

  std::vector<OctaveCoefficients> result;
  result.reserve(j_max);
  Eigen::MatrixXd approx = path.data;
  for (int j = 1; j <= j_max; ++j) {
    const std::int64_t parent = approx.rows();
    const std::int64_t count = (parent - len) / 2 + 1;
    OctaveCoefficients oct;
    oct.octave = j;
    oct.k_count = count;
    oct.coeffs.resize(count, n);
    Eigen::MatrixXd next(count, n);
    const double norm = std::pow(2.0, -0.5 * j);
    for (int c = 0; c < n; ++c) {
      const double* a = approx.col(c).data();
      for (std::int64_t k = 0; k < count; ++k) {
        const double* base = a + 2 * k;
        double low = 0.0;
        double high = 0.0;
        for (std::int64_t m = 0; m < len; ++m) {
          low += h[m] * base[m];
          high += g[m] * base[m];
        }
        next(k, c) = low;
        oct.coeffs(k, c) = norm * high;
      }
    }
    result.push_back(std::move(oct));
    approx = std::move(next);
  }
  return result;
}

int deepest_octave(std::int64_t nu, const WaveletBank& bank, int n) {
  if (n < 1) throw validation_error("deepest_octave: n must be >= 1");
  const std::int64_t min_nu = std::int64_t{1} << (bank.n_moments + 1);
  if (nu < min_nu) {
    throw validation_error("deepest_octave: need at least " + std::to_string(min_nu) +
                           " samples for a bank with " +
                           std::to_string(bank.n_moments) + " vanishing moments");
  }
  int log2nu = 0;
  while ((std::int64_t{1} << (log2nu + 1)) <= nu) ++log2nu;
  const int j_default = log2nu - bank.n_moments;

  const std::int64_t needed = n + 1;
  int j_cap = 0;
  while (coefficient_count(nu, bank.n_moments, j_cap + 1) >= needed) ++j_cap;
  if (j_cap < 1) {
    throw validation_error("deepest_octave: no octave retains the " +
                           std::to_string(needed) +
                           " coefficients required for an " + std::to_string(n) +
                           "-variate spectrum at nu = " + std::to_string(nu));
  }
  return std::min(j_default, j_cap);
}

} // namespace ofbm
