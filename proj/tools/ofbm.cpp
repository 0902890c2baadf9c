// Command-line frontend: synthesis, wavelet-regression analysis, robust
// median analysis over subtraces, Monte Carlo validation, and filter dumps.
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fnmatch.h>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ofbm/errors.hpp"
#include "ofbm/estimator.hpp"
#include "ofbm/io.hpp"
#include "ofbm/model.hpp"
#include "ofbm/montecarlo.hpp"
#include "ofbm/spectrum.hpp"
#include "ofbm/synthesis.hpp"
#include "ofbm/wavelet.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

ofbm::WaveletVariant parse_variant(const std::string& text) {
  if (text == "la") return ofbm::WaveletVariant::least_asymmetric;
  if (text == "ep") return ofbm::WaveletVariant::extremal_phase;
  throw ofbm::validation_error("--variant must be 'la' or 'ep'");
}

int parse_j2(const std::string& text) {
  if (text == "auto") return -1;
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw ofbm::validation_error("--j2 must be 'auto' or an integer");
}

// Expands an --inputs value: a literal path is kept as-is; a value containing
// glob metacharacters is matched against its parent directory and the matches
// are appended in sorted order.
void expand_input(const std::string& pattern, std::vector<std::string>& out) {
  if (pattern.find_first_of("*?[") == std::string::npos) {
    out.push_back(pattern);
    return;
  }
  namespace fs = std::filesystem;
  const fs::path p(pattern);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  const std::string leaf = p.filename().string();
  std::vector<std::string> matches;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (fnmatch(leaf.c_str(), name.c_str(), 0) == 0) {
      matches.push_back(entry.path().string());
    }
  }
  if (ec) throw ofbm::io_error("cannot list directory " + dir.string());
  if (matches.empty()) {
    throw ofbm::io_error("no files match pattern " + pattern);
  }
  std::sort(matches.begin(), matches.end());
  out.insert(out.end(), matches.begin(), matches.end());
}

struct AnalyzeOptions {
  int j1 = 6;
  std::string j2 = "auto";
  int n_moments = 2;
  std::string variant = "la";
  std::string b_policy = "nu-over-2j";
};

void add_analysis_flags(CLI::App* cmd, AnalyzeOptions& opts) {
  cmd->add_option("--j1", opts.j1, "finest analysis octave (default 6)");
  cmd->add_option("--j2", opts.j2, "coarsest analysis octave, or 'auto'")
      ->default_val("auto");
  cmd->add_option("--nmom", opts.n_moments, "vanishing moments (1..10, default 2)");
  cmd->add_option("--variant", opts.variant, "filter variant: la or ep")
      ->default_val("la");
  cmd->add_option("--b", opts.b_policy,
                  "confidence scalars: uniform or nu-over-2j")
      ->default_val("nu-over-2j");
}

ofbm::RegressionWeights weights_for(const AnalyzeOptions& opts,
                                    const ofbm::WaveletBank& bank,
                                    std::int64_t nu, int n, int* j2_out) {
  const int j2 = parse_j2(opts.j2) > 0 ? parse_j2(opts.j2)
                                       : ofbm::deepest_octave(nu, bank, n);
  if (j2_out) *j2_out = j2;
  if (opts.j1 < 6) {
    std::cerr << "warning: j1 = " << opts.j1
              << " < 6 trades extra variance reduction for bias\n";
  }
  std::vector<double> b;
  if (opts.b_policy == "uniform") {
    b = ofbm::uniform_scalars(opts.j1, j2);
  } else if (opts.b_policy == "nu-over-2j") {
    b = ofbm::dyadic_scalars(opts.j1, j2, nu);
  } else {
    throw ofbm::validation_error("--b must be 'uniform' or 'nu-over-2j'");
  }
  return ofbm::make_weights(opts.j1, j2, b);
}

ofbm::SamplePath path_from_csv(const std::string& input) {
  ofbm::SamplePath path;
  path.data = ofbm::read_matrix_csv(input);
  path.nu = path.data.rows();
  if (!path.data.allFinite()) {
    throw ofbm::validation_error(input + ": non-finite entries in series");
  }
  return path;
}

int run_synth(const std::string& config, std::int64_t nu, std::uint64_t seed,
              const std::string& out) {
  if (nu < 2) throw ofbm::validation_error("--nu must be >= 2");
  std::vector<std::string> warnings;
  const ofbm::OfbmSpec spec = ofbm::load_spec_file(config, &warnings);
  print_warnings(warnings);
  const ofbm::SynthesisPlan plan = ofbm::build_plan(spec, nu);
  const ofbm::SamplePath path = ofbm::synthesize(plan, seed);
  ofbm::write_matrix_csv(out, path.data);
  return 0;
}

int run_filters(int n_moments, const std::string& variant, bool highpass) {
  const ofbm::WaveletBank bank = ofbm::make_bank(n_moments, parse_variant(variant));
  const std::vector<double>& taps = highpass ? bank.highpass : bank.lowpass;
  std::string out;
  for (double tap : taps) {
    out += ofbm::format_double(tap);
    out.push_back('\n');
  }
  std::cout << out;
  return 0;
}

int run_analyze(const std::string& input, const std::string& out,
                const std::string& logscale, const AnalyzeOptions& opts) {
  const ofbm::SamplePath path = path_from_csv(input);
  const ofbm::WaveletBank bank =
      ofbm::make_bank(opts.n_moments, parse_variant(opts.variant));
  const int n = static_cast<int>(path.data.cols());
  int j2 = 0;
  const ofbm::RegressionWeights weights = weights_for(opts, bank, path.nu, n, &j2);
  const auto coeffs = ofbm::pyramid(path, bank, j2);
  const ofbm::WaveletSpectrum spectrum = ofbm::compute_spectrum(coeffs);
  const ofbm::HurstEstimates estimates = ofbm::estimate(spectrum, weights);
  ofbm::write_text_file(out, ofbm::estimates_to_json(estimates).dump(2) + "\n");
  if (!logscale.empty()) {
    ofbm::write_text_file(logscale, ofbm::logscale_tsv(ofbm::logscale_diagram(spectrum)));
  }
  return 0;
}

int run_median_analyze(const std::vector<std::string>& inputs, const std::string& out,
                       const AnalyzeOptions& opts) {
  std::vector<std::string> files;
  for (const std::string& pattern : inputs) expand_input(pattern, files);
  if (files.empty()) throw ofbm::validation_error("--inputs matched no files");

  const ofbm::WaveletBank bank =
      ofbm::make_bank(opts.n_moments, parse_variant(opts.variant));
  std::vector<ofbm::WaveletSpectrum> spectra;
  spectra.reserve(files.size());
  int n = 0;
  std::int64_t min_nu = 0;
  for (const std::string& file : files) {
    const ofbm::SamplePath path = path_from_csv(file);
    if (n == 0) {
      n = static_cast<int>(path.data.cols());
      min_nu = path.nu;
    } else if (static_cast<int>(path.data.cols()) != n) {
      throw ofbm::validation_error(file + ": expected " + std::to_string(n) +
                                   " columns like the first subtrace, found " +
                                   std::to_string(path.data.cols()));
    }
    min_nu = std::min(min_nu, path.nu);
  }
  int j2 = 0;
  const ofbm::RegressionWeights weights = weights_for(opts, bank, min_nu, n, &j2);
  for (const std::string& file : files) {
    const ofbm::SamplePath path = path_from_csv(file);
    spectra.push_back(ofbm::compute_spectrum(ofbm::pyramid(path, bank, j2)));
  }
  const ofbm::HurstEstimates estimates = ofbm::median_estimate(spectra, weights);
  ofbm::write_text_file(out, ofbm::estimates_to_json(estimates).dump(2) + "\n");
  return 0;
}

int run_mc(const std::string& config_path, int reps_override, int workers,
           const std::string& out, const std::string& raw) {
  std::vector<std::string> warnings;
  ofbm::McConfig config = ofbm::load_mc_config_file(config_path, &warnings);
  print_warnings(warnings);
  if (reps_override > 0) config.reps = reps_override;
  const ofbm::McSummary summary = ofbm::run_monte_carlo(config, workers);
  ofbm::write_text_file(out, ofbm::summary_to_json(summary).dump(2) + "\n");
  if (!raw.empty()) {
    ofbm::write_text_file(raw, ofbm::raw_estimates_csv(summary));
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator fractional Brownian motion: synthesis, wavelet "
               "spectrum, Hurst eigenvalue regression, Monte Carlo validation"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "synthesize a sample path to CSV");
  std::string synth_config, synth_out;
  std::int64_t synth_nu = 0;
  std::uint64_t synth_seed = 0;
  synth->add_option("--config", synth_config, "model spec JSON")->required();
  synth->add_option("--nu", synth_nu, "path length")->required();
  synth->add_option("--seed", synth_seed, "RNG seed (default 0)");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  // filters
  auto* filters = app.add_subcommand("filters", "print wavelet filter taps");
  int filters_nmom = 0;
  std::string filters_variant = "la";
  bool filters_highpass = false;
  filters->add_option("--nmom", filters_nmom, "vanishing moments (1..10)")->required();
  filters->add_option("--variant", filters_variant, "la or ep")->default_val("la");
  filters->add_flag("--highpass", filters_highpass, "print highpass taps instead");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "estimate Hurst eigenvalues from a CSV series");
  std::string analyze_input, analyze_out, analyze_logscale;
  AnalyzeOptions analyze_opts;
  analyze->add_option("--input", analyze_input, "input CSV series")->required();
  analyze->add_option("--out", analyze_out, "estimates JSON path")->required();
  analyze->add_option("--logscale", analyze_logscale, "optional logscale TSV path");
  add_analysis_flags(analyze, analyze_opts);

  // median-analyze
  auto* median = app.add_subcommand(
      "median-analyze", "median-across-subtraces estimate from multiple CSVs");
  std::vector<std::string> median_inputs;
  std::string median_out;
  AnalyzeOptions median_opts;
  median->add_option("--inputs", median_inputs,
                     "subtrace CSV paths (repeatable; globs allowed)")
      ->required();
  median->add_option("--out", median_out, "estimates JSON path")->required();
  add_analysis_flags(median, median_opts);

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo validation runs");
  std::string mc_config, mc_out, mc_raw;
  int mc_reps = 0;
  int mc_workers = 1;
  mc->add_option("--config", mc_config, "mc config JSON")->required();
  mc->add_option("--reps", mc_reps, "override replication count");
  mc->add_option("--workers", mc_workers, "worker thread count (default 1)");
  mc->add_option("--out", mc_out, "summary JSON path")->required();
  mc->add_option("--raw", mc_raw, "optional raw per-replication CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth) return run_synth(synth_config, synth_nu, synth_seed, synth_out);
    if (*filters) return run_filters(filters_nmom, filters_variant, filters_highpass);
    if (*analyze) return run_analyze(analyze_input, analyze_out, analyze_logscale, analyze_opts);
    if (*median) return run_median_analyze(median_inputs, median_out, median_opts);
    if (*mc) return run_mc(mc_config, mc_reps, mc_workers, mc_out, mc_raw);
  } catch (const ofbm::validation_error& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ofbm::io_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return kExitIo;
  } catch (const ofbm::numerical_error& e) {
    std::cerr << "error: numerical: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
