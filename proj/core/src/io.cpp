#include "ofbm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "ofbm/errors.hpp"

namespace ofbm {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool try_parse_double(std::string_view token, double& out) {
  token = trim(token);
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto result = std::from_chars(first, last, out);
  return result.ec == std::errc() && result.ptr == last;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

// Nonfinite numbers have no JSON representation; store them as explicit
// nulls so in-memory documents match the serialized text.
ordered_json finite_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(finite_or_null(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(finite_or_null(v[i]));
  return arr;
}

ordered_json vector_to_json(const std::vector<double>& v) {
  ordered_json arr = ordered_json::array();
  for (double x : v) arr.push_back(finite_or_null(x));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& doc, const std::string& key, int n) {
  if (!doc.contains(key) || !doc[key].is_array() ||
      static_cast<int>(doc[key].size()) != n) {
    throw validation_error("spec: '" + key + "' must be an array of " +
                           std::to_string(n) + " rows");
  }
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r) {
    const json& row = doc[key][static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw validation_error("spec: '" + key + "' row " + std::to_string(r + 1) +
                             " must have " + std::to_string(n) + " entries");
    }
    for (int c = 0; c < n; ++c) {
      const json& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) {
        throw validation_error("spec: '" + key + "' entries must be numbers");
      }
      m(r, c) = cell.get<double>();
    }
  }
  return m;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw io_error("failed to parse JSON from " + origin);
  }
  return doc;
}

ordered_json cells_to_json(const std::vector<McCell>& cells,
                           const Eigen::MatrixXd& cov) {
  ordered_json out;
  const auto field = [&](const char* name, auto getter) {
    ordered_json arr = ordered_json::array();
    for (const McCell& cell : cells) arr.push_back(finite_or_null(getter(cell)));
    out[name] = std::move(arr);
  };
  field("mean", [](const McCell& c) { return c.mean; });
  field("bias", [](const McCell& c) { return c.bias; });
  field("std", [](const McCell& c) { return c.stddev; });
  field("skewness", [](const McCell& c) { return c.skewness; });
  field("excess_kurtosis", [](const McCell& c) { return c.excess_kurtosis; });
  field("ci_lo", [](const McCell& c) { return c.ci_lo; });
  field("ci_hi", [](const McCell& c) { return c.ci_hi; });
  out["covariance"] = matrix_to_json(cov);
  return out;
}

} // namespace

std::string format_double(double value) {
  char buf[64];
  const auto result =
      std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, result.ptr);
}

double parse_double(const std::string& token) {
  double out = 0.0;
  if (!try_parse_double(token, out)) {
    throw io_error("cannot parse '" + token + "' as a number");
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path + " for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw io_error("failed while reading " + path);
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw io_error("failed while writing " + path);
}

std::string matrix_to_csv(const Eigen::MatrixXd& data) {
  std::string out;
  out.reserve(static_cast<std::size_t>(data.size()) * 26 + 64);
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    if (c) out.push_back(',');
    out += "x" + std::to_string(c + 1);
  }
  out.push_back('\n');
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c) out.push_back(',');
      out += format_double(data(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& data) {
  write_text_file(path, matrix_to_csv(data));
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::size_t cols = 0;
  bool first_content_line = true;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    const std::string_view line =
        trim(std::string_view(text).substr(start, end == std::string::npos
                                                      ? std::string::npos
                                                      : end - start));
    ++line_no;
    start = end == std::string::npos ? text.size() + 1 : end + 1;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!try_parse_double(fields[i], row[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first_content_line) {
        first_content_line = false;  // header row
        continue;
      }
      throw io_error(path + ":" + std::to_string(line_no) +
                     ": non-numeric field in data row");
    }
    first_content_line = false;
    if (cols == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw io_error(path + ":" + std::to_string(line_no) + ": expected " +
                     std::to_string(cols) + " fields, found " +
                     std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error(path + ": no numeric rows found");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return data;
}

OfbmSpec spec_from_json(const json& doc) {
  if (!doc.is_object()) throw validation_error("spec: document must be a JSON object");
  if (!doc.contains("n") || !doc["n"].is_number_integer()) {
    throw validation_error("spec: integer field 'n' is required");
  }
  OfbmSpec spec;
  spec.n = doc["n"].get<int>();
  if (spec.n < 1) throw validation_error("spec: dimension n must be >= 1");
  if (!doc.contains("hurst") || !doc["hurst"].is_array() ||
      static_cast<int>(doc["hurst"].size()) != spec.n) {
    throw validation_error("spec: 'hurst' must be an array of n numbers");
  }
  spec.hurst.resize(spec.n);
  for (int q = 0; q < spec.n; ++q) {
    const json& cell = doc["hurst"][static_cast<std::size_t>(q)];
    if (!cell.is_number()) throw validation_error("spec: 'hurst' entries must be numbers");
    spec.hurst[q] = cell.get<double>();
  }
  spec.mixing = matrix_from_json(doc, "mixing", spec.n);
  spec.premix_cov = matrix_from_json(doc, "premix_cov", spec.n);
  return spec;
}

ordered_json spec_to_json(const OfbmSpec& spec) {
  ordered_json doc;
  doc["n"] = spec.n;
  doc["hurst"] = vector_to_json(spec.hurst);
  doc["mixing"] = matrix_to_json(spec.mixing);
  doc["premix_cov"] = matrix_to_json(spec.premix_cov);
  return doc;
}

OfbmSpec load_spec_file(const std::string& path, std::vector<std::string>* warnings) {
  OfbmSpec spec = spec_from_json(parse_json_text(read_text_file(path), path));
  std::vector<std::string> notes = validate_spec(spec);
  if (warnings) {
    warnings->insert(warnings->end(), notes.begin(), notes.end());
  }
  return spec;
}

nlohmann::ordered_json estimates_to_json(const HurstEstimates& estimates) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["j1"] = estimates.weights.j1;
  doc["j2"] = estimates.weights.j2;
  doc["b"] = vector_to_json(estimates.weights.b);
  doc["w"] = vector_to_json(estimates.weights.w);
  doc["h_multivariate"] = vector_to_json(estimates.h_multivariate);
  doc["h_univariate"] = vector_to_json(estimates.h_univariate);
  doc["subtraces"] = estimates.subtraces;
  const int n = static_cast<int>(estimates.h_multivariate.size());
  ordered_json k_map;
  ordered_json eig_map;
  ordered_json diag_map;
  for (int j = estimates.weights.j1; j <= estimates.weights.j2; ++j) {
    ordered_json eig_row = ordered_json::array();
    ordered_json diag_row = ordered_json::array();
    std::int64_t k_count = 0;
    for (const LogscaleRow& row : estimates.per_octave) {
      if (row.octave != j) continue;
      eig_row.push_back(finite_or_null(row.log2_lambda));
      diag_row.push_back(finite_or_null(row.log2_diag));
      k_count = row.k_count;
    }
    if (static_cast<int>(eig_row.size()) != n) {
      throw numerical_error("estimates_to_json: octave table incomplete at j = " +
                            std::to_string(j));
    }
    const std::string key = std::to_string(j);
    k_map[key] = k_count;
    eig_map[key] = std::move(eig_row);
    diag_map[key] = std::move(diag_row);
  }
  doc["K"] = std::move(k_map);
  doc["log2_eig"] = std::move(eig_map);
  doc["log2_diag"] = std::move(diag_map);
  return doc;
}

std::string logscale_tsv(const std::vector<LogscaleRow>& rows) {
  std::string out = "j\tq\tlog2_lambda\tlog2_diag\tK\n";
  for (const LogscaleRow& row : rows) {
    out += std::to_string(row.octave);
    out.push_back('\t');
    out += std::to_string(row.q);
    out.push_back('\t');
    out += row.lambda_positive ? format_double(row.log2_lambda) : "nan";
    out.push_back('\t');
    out += row.diag_positive ? format_double(row.log2_diag) : "nan";
    out.push_back('\t');
    out += std::to_string(row.k_count);
    out.push_back('\n');
  }
  return out;
}

McConfig mc_config_from_json(const json& doc, std::vector<std::string>* warnings) {
  if (!doc.is_object()) {
    throw validation_error("mc config: document must be a JSON object");
  }
  McConfig config;
  if (doc.contains("spec")) {
    config.spec = spec_from_json(doc["spec"]);
  } else {
    throw validation_error("mc config: 'spec' object is required");
  }
  std::vector<std::string> notes = validate_spec(config.spec);
  if (warnings) warnings->insert(warnings->end(), notes.begin(), notes.end());

  if (!doc.contains("nus") || !doc["nus"].is_array() || doc["nus"].empty()) {
    throw validation_error("mc config: 'nus' must be a non-empty array");
  }
  for (const json& cell : doc["nus"]) {
    if (!cell.is_number_integer()) {
      throw validation_error("mc config: 'nus' entries must be integers");
    }
    config.nus.push_back(cell.get<std::int64_t>());
  }
  if (!doc.contains("reps") || !doc["reps"].is_number_integer()) {
    throw validation_error("mc config: integer field 'reps' is required");
  }
  config.reps = doc["reps"].get<int>();
  config.base_seed = doc.value("base_seed", std::uint64_t{0});
  config.n_moments = doc.value("n_moments", 2);
  const std::string variant = doc.value("variant", std::string("la"));
  if (variant == "la") {
    config.variant = WaveletVariant::least_asymmetric;
  } else if (variant == "ep") {
    config.variant = WaveletVariant::extremal_phase;
  } else {
    throw validation_error("mc config: 'variant' must be \"la\" or \"ep\"");
  }
  config.j1 = doc.value("j1", 6);
  if (doc.contains("j2")) {
    if (doc["j2"].is_string()) {
      if (doc["j2"].get<std::string>() != "auto") {
        throw validation_error("mc config: 'j2' must be \"auto\" or an integer");
      }
      config.j2 = -1;
    } else if (doc["j2"].is_number_integer()) {
      config.j2 = doc["j2"].get<int>();
    } else {
      throw validation_error("mc config: 'j2' must be \"auto\" or an integer");
    }
  }
  const std::string b_policy = doc.value("b", std::string("nu-over-2j"));
  if (b_policy == "uniform") {
    config.scalar_policy = ScalarPolicy::uniform;
  } else if (b_policy == "nu-over-2j") {
    config.scalar_policy = ScalarPolicy::dyadic;
  } else {
    throw validation_error("mc config: 'b' must be \"uniform\" or \"nu-over-2j\"");
  }
  config.bootstrap_resamples = doc.value("bootstrap_resamples", 1000);
  config.ci_level = doc.value("ci_level", 0.95);
  return config;
}

McConfig load_mc_config_file(const std::string& path,
                             std::vector<std::string>* warnings) {
  return mc_config_from_json(parse_json_text(read_text_file(path), path), warnings);
}

nlohmann::ordered_json summary_to_json(const McSummary& summary) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["n"] = summary.n;
  doc["reps"] = summary.reps;
  doc["base_seed"] = summary.base_seed;
  ordered_json by_nu = ordered_json::array();
  for (const McNuResult& result : summary.by_nu) {
    ordered_json entry;
    entry["nu"] = result.nu;
    entry["j1"] = result.j1;
    entry["j2"] = result.j2;
    entry["multivariate"] = cells_to_json(result.multivariate, result.cov_multivariate);
    entry["univariate"] = cells_to_json(result.univariate, result.cov_univariate);
    by_nu.push_back(std::move(entry));
  }
  doc["by_nu"] = std::move(by_nu);
  ordered_json slopes;
  slopes["multivariate"] = vector_to_json(summary.std_slope_multivariate);
  slopes["univariate"] = vector_to_json(summary.std_slope_univariate);
  doc["std_decay_slope"] = std::move(slopes);
  return doc;
}

std::string raw_estimates_csv(const McSummary& summary) {
  std::string out = "nu,rep,estimator,q,h_hat\n";
  for (const McNuResult& result : summary.by_nu) {
    for (Eigen::Index r = 0; r < result.raw_multivariate.rows(); ++r) {
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd& raw =
            pass == 0 ? result.raw_multivariate : result.raw_univariate;
        const char* name = pass == 0 ? "multi" : "uni";
        for (Eigen::Index q = 0; q < raw.cols(); ++q) {
          out += std::to_string(result.nu);
          out.push_back(',');
          out += std::to_string(r);
          out.push_back(',');
          out += name;
          out.push_back(',');
          out += std::to_string(q + 1);
          out.push_back(',');
          out += format_double(raw(r, q));
          out.push_back('\n');
        }
      }
    }
  }
  return out;
}

} // namespace ofbm
