#include "ofbm/spectrum.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ofbm/errors.hpp"

namespace ofbm {

Eigen::MatrixXd wavelet_variance(const OctaveCoefficients& coeffs) {
  if (coeffs.k_count < 1 || coeffs.coeffs.rows() != coeffs.k_count) {
    throw validation_error("wavelet_variance: no coefficients at octave " +
                           std::to_string(coeffs.octave));
  }
  const int n = static_cast<int>(coeffs.coeffs.cols());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  w.selfadjointView<Eigen::Lower>().rankUpdate(
      coeffs.coeffs.transpose(), 1.0 / static_cast<double>(coeffs.k_count));
  w.triangularView<Eigen::StrictlyUpper>() =
      w.transpose().triangularView<Eigen::StrictlyUpper>();
  return w;
}

void eigh_sorted(const Eigen::MatrixXd& w, Eigen::VectorXd& eigvals,
                 Eigen::MatrixXd& eigvecs) {
  if (w.rows() != w.cols() || w.rows() < 1) {
    throw validation_error("eigh_sorted: matrix must be square");
  }
  const double scale = w.cwiseAbs().maxCoeff();
  const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1e-300)) {
    throw validation_error("eigh_sorted: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
  if (es.info() != Eigen::Success) {
    throw numerical_error("eigh_sorted: eigensolver did not converge");
  }
  eigvals = es.eigenvalues();  // ascending
  eigvecs = es.eigenvectors();
  for (Eigen::Index c = 0; c < eigvecs.cols(); ++c) {
    const double peak = eigvecs.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < eigvecs.rows(); ++r) {
      const double v = eigvecs(r, c);
      if (std::abs(v) > 1e-12 * peak) {
        if (v < 0.0) eigvecs.col(c) = -eigvecs.col(c);
        break;
      }
    }
  }
}

WaveletSpectrum compute_spectrum(const std::vector<OctaveCoefficients>& coeffs) {
  if (coeffs.empty()) {
    throw validation_error("compute_spectrum: no octaves supplied");
  }
  WaveletSpectrum spectrum;
  spectrum.n = static_cast<int>(coeffs.front().coeffs.cols());
  spectrum.octaves.reserve(coeffs.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const OctaveCoefficients& oct : coeffs) {
    if (oct.coeffs.cols() != spectrum.n) {
      throw validation_error("compute_spectrum: octaves disagree on dimension");
    }
    OctaveSpectrum out;
    out.octave = oct.octave;
    out.k_count = oct.k_count;
    out.w = wavelet_variance(oct);
    eigh_sorted(out.w, out.eigvals, out.eigvecs);
    const double norm = out.eigvals.cwiseAbs().maxCoeff();
    const double floor = -1e-10 * norm;
    for (Eigen::Index q = 0; q < out.eigvals.size(); ++q) {
      if (out.eigvals[q] < 0.0) {
        if (out.eigvals[q] < floor) {
          throw numerical_error(
              "compute_spectrum: variance matrix at octave " +
              std::to_string(oct.octave) + " has eigenvalue " +
              std::to_string(out.eigvals[q]) + " beyond rounding tolerance");
        }
        out.eigvals[q] = 0.0;
      }
    }
    out.diag_log2.resize(spectrum.n);
    for (int q = 0; q < spectrum.n; ++q) {
      const double d = out.w(q, q);
      out.diag_log2[q] = d > 0.0 ? std::log2(d) : nan;
    }
    spectrum.octaves.push_back(std::move(out));
  }
  return spectrum;
}

std::vector<LogscaleRow> logscale_diagram(const WaveletSpectrum& spectrum) {
  std::vector<LogscaleRow> rows;
  rows.reserve(spectrum.octaves.size() * static_cast<std::size_t>(spectrum.n));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const OctaveSpectrum& oct : spectrum.octaves) {
    for (int q = 0; q < spectrum.n; ++q) {
      LogscaleRow row;
      row.octave = oct.octave;
      row.q = q + 1;
      row.k_count = oct.k_count;
      row.lambda_positive = oct.eigvals[q] > 0.0;
      row.log2_lambda = row.lambda_positive ? std::log2(oct.eigvals[q]) : nan;
      row.diag_positive = oct.w(q, q) > 0.0;
      row.log2_diag = row.diag_positive ? oct.diag_log2[q] : nan;
      rows.push_back(row);
    }
  }
  return rows;
}

} // namespace ofbm
