#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbsvm/corpus.hpp"
#include "sbsvm/ensemble.hpp"
#include "sbsvm/fusion.hpp"
#include "sbsvm/mfcc_frontend.hpp"
#include "sbsvm/multiclass.hpp"

namespace sbsvm {

struct HyperParams {
  int S = 16;
  int theta = 6;
  int T = 10;
  double C = 1.0;
  double svm_tol = 1e-3;
};

struct CorpusConfig {
  std::filesystem::path dir;  // synthetic corpus location (written by prepare)
  bool synthetic = true;
  SynthSpec synth;
  std::uint64_t synth_seed = 1234;
  // External corpus (synthetic == false).
  std::filesystem::path audio_dir, alignment_dir, classmap;
};

struct SplitConfig {
  double train = 0.5, dev = 0.25, test = 0.25;
  double dev_subset_fraction = 0.125;
  std::uint64_t seed = 7;
};

// "quiet" is a distinguished grid point, not a large finite SNR.
using SnrPoint = std::optional<double>;  // nullopt = quiet
std::string snr_label(const SnrPoint& p);

struct ExperimentConfig {
  std::uint64_t seed = 42;
  int threads = 0;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir;  // default: output_dir / "cache"
  CorpusConfig corpus;
  SplitConfig split;
  std::vector<std::string> front_ends{"mfcc", "subband", "fused"};
  MfccScenarioKind mfcc_scenario = MfccScenarioKind::anechoic_vts;
  bool mfcc_vts = true;
  MetaScenario meta_scenario = MetaScenario::multistyle_anechoic;
  bool test_reverb = false;  // convolve test data with the reference RIR R
  std::vector<NoiseKind> noise{NoiseKind::white};
  std::filesystem::path noise_file;
  std::vector<SnrPoint> snr_grid{std::nullopt, 18, 12, 6, 0, -6};
  HyperParams hyper;
  FusionParams fusion;
  DecodeLoss decode_loss = DecodeLoss::hinge;
  // Experiment hook (stacked-generalization study): subband to replace with noise.
  int inject_noise_subband = -1;
  std::uint64_t inject_noise_seed = 0;

  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
  std::filesystem::path resolved_cache_dir() const {
    return cache_dir.empty() ? output_dir / "cache" : cache_dir;
  }
};

struct ResultRow {
  std::string front_end;
  std::string scenario;
  std::string noise;
  std::string snr;  // "quiet" or dB value
  double error_pct = 0.0;
  int n_test = 0;
  std::uint64_t seed = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

// Grouped multiclass error: a prediction is correct when it matches the truth
// or shares the truth's confusion group. Returns percent in [0, 100].
double compute_error(std::span<const int> predictions, std::span<const int> truths,
                     const ClassMap& map);

// Generates the synthetic corpus files when configured and absent; loads and
// returns the corpus either way. Throws (listing files) on load errors.
struct PreparedCorpus {
  std::vector<Utterance> utterances;  // unit-energy normalized
  ClassMap map;
};
PreparedCorpus prepare_corpus(const ExperimentConfig& cfg, bool regenerate = false);

struct SweepOutputs {
  ResultTable table;
  std::filesystem::path results_csv;
  std::filesystem::path manifest_path;
  std::vector<std::string> warnings;
};

// The full experimental protocol: train (or load cached) front-ends, sweep
// the (noise x SNR) grid, and emit results.csv, per-figure plot data, weight
// reports, confusion matrices and a manifest under output_dir.
SweepOutputs run_sweep(const ExperimentConfig& cfg);

// One grid point; trains/loads what it needs. Appends nothing to disk.
ResultTable evaluate_point(const ExperimentConfig& cfg, NoiseKind noise, const SnrPoint& snr);

// One whitespace-delimited file per (noise, scenario): column 1 the SNR label
// ("quiet" included), then one error column per front-end present.
std::vector<std::filesystem::path> emit_plot_data(const ResultTable& table,
                                                  const std::filesystem::path& dir);

void write_results_csv(const ResultTable& table, const std::filesystem::path& path);
ResultTable read_results_csv(const std::filesystem::path& path);

// Trains (or loads from cache) the artifacts the configured front ends need;
// `which` is one of "base", "mfcc", "meta", "all". Matched scenarios are
// warmed at the quiet point only; other grid points train during evaluation.
void train_artifacts(const ExperimentConfig& cfg, const std::string& which);

}  // namespace sbsvm
