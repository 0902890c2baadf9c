#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ofbm/estimator.hpp"
#include "ofbm/model.hpp"
#include "ofbm/montecarlo.hpp"
#include "ofbm/spectrum.hpp"

namespace ofbm {

// 17-significant-digit decimal rendering (round-trips any double exactly);
// locale-free.  NaN renders as "nan".
std::string format_double(double value);

// Locale-free strict double parsing of a whole token.
double parse_double(const std::string& token);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Matrix CSV: header x1..xn, one row per time step, 17 significant digits.
std::string matrix_to_csv(const Eigen::MatrixXd& data);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& data);

// Reads a numeric CSV; a first line that does not parse as numbers is
// treated as a header and skipped.  Decimal point only, no locale.
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// OfbmSpec JSON: {"n": ..., "hurst": [...], "mixing": [[...]],
// "premix_cov": [[...]]}, matrices row-major.
OfbmSpec spec_from_json(const nlohmann::json& doc);
nlohmann::ordered_json spec_to_json(const OfbmSpec& spec);
// Loads and validates; validation warnings are appended to *warnings.
OfbmSpec load_spec_file(const std::string& path, std::vector<std::string>* warnings);

// Estimates document (schema_version, j1, j2, b, w, h_multivariate,
// h_univariate, K, log2_eig, log2_diag).
nlohmann::ordered_json estimates_to_json(const HurstEstimates& estimates);

// Logscale table: header "j\tq\tlog2_lambda\tlog2_diag\tK", one row per
// (j, q); nonpositive statistics render as nan.
std::string logscale_tsv(const std::vector<LogscaleRow>& rows);

// Monte Carlo config JSON: {"spec": {...}, "nus": [...], "reps": ...,
// "base_seed": ..., optional "n_moments", "variant" ("la"|"ep"), "j1",
// "j2" ("auto" or integer), "b" ("uniform"|"nu-over-2j"),
// "bootstrap_resamples", "ci_level"}.
McConfig mc_config_from_json(const nlohmann::json& doc,
                             std::vector<std::string>* warnings);
McConfig load_mc_config_file(const std::string& path,
                             std::vector<std::string>* warnings);

nlohmann::ordered_json summary_to_json(const McSummary& summary);

// Raw replication estimates: header "nu,rep,estimator,q,h_hat".
std::string raw_estimates_csv(const McSummary& summary);

} // namespace ofbm
