#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "sbsvm/filterbank.hpp"
#include "sbsvm/harness.hpp"
#include "sbsvm/simd.hpp"

using namespace sbsvm;

namespace {

ExperimentConfig load_config(const std::string& path) {
  return ExperimentConfig::from_json_file(path);
}

void print_rows(const ResultTable& t) {
  for (const auto& r : t.rows)
    std::printf("%-8s %-28s %-6s %6s  error %6.2f%%  (n=%d)\n", r.front_end.c_str(),
                r.scenario.c_str(), r.noise.c_str(), r.snr.c_str(), r.error_pct, r.n_test);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subband SVM phoneme classification front-end"};
  app.require_subcommand(1);
  std::string config_path;

  auto* prepare = app.add_subcommand("prepare", "Generate or validate the corpus");
  bool regenerate = false;
  prepare->add_option("--config", config_path, "Experiment config (JSON)")->required();
  prepare->add_flag("--regenerate", regenerate, "Rebuild synthetic corpus files");

  auto* train_base_cmd = app.add_subcommand("train-base", "Train subband base-level SVMs");
  train_base_cmd->add_option("--config", config_path)->required();
  auto* train_mfcc_cmd = app.add_subcommand("train-mfcc", "Train the cepstral baseline");
  train_mfcc_cmd->add_option("--config", config_path)->required();
  auto* train_meta_cmd = app.add_subcommand("train-meta", "Train stacked meta-level SVMs");
  train_meta_cmd->add_option("--config", config_path)->required();

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate one (noise, SNR) grid point");
  std::string noise_name = "white", snr_text = "quiet";
  evaluate->add_option("--config", config_path)->required();
  evaluate->add_option("--noise", noise_name, "white|pink|file");
  evaluate->add_option("--snr", snr_text, "SNR in dB, or 'quiet'");

  auto* sweep = app.add_subcommand("sweep", "Run the full (noise x SNR) sweep");
  sweep->add_option("--config", config_path, "Config or manifest JSON")->required();

  auto* report = app.add_subcommand("report", "Emit plot data from a results.csv");
  std::string results_path, report_dir = ".";
  report->add_option("--results", results_path, "results.csv path")->required();
  report->add_option("--out", report_dir, "Output directory");

  auto* taps = app.add_subcommand("taps", "Dump CMFB filter taps as text (debug)");
  int taps_s = 16;
  taps->add_option("--S", taps_s, "Channel count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) {
      auto cfg = load_config(config_path);
      auto corpus = prepare_corpus(cfg, regenerate);
      std::size_t phones = 0;
      for (const auto& u : corpus.utterances) phones += u.phones.size();
      std::printf("corpus ready: %zu utterances, %zu phone instances, %d classes\n",
                  corpus.utterances.size(), phones, corpus.map.num_classes());
    } else if (train_base_cmd->parsed()) {
      train_artifacts(load_config(config_path), "base");
      std::puts("base models ready");
    } else if (train_mfcc_cmd->parsed()) {
      train_artifacts(load_config(config_path), "mfcc");
      std::puts("mfcc models ready");
    } else if (train_meta_cmd->parsed()) {
      train_artifacts(load_config(config_path), "meta");
      std::puts("meta models ready");
    } else if (evaluate->parsed()) {
      auto cfg = load_config(config_path);
      SnrPoint snr = snr_text == "quiet" ? SnrPoint{} : SnrPoint{std::stod(snr_text)};
      auto t = evaluate_point(cfg, noise_kind_from_name(noise_name), snr);
      print_rows(t);
    } else if (sweep->parsed()) {
      auto cfg = load_config(config_path);
      auto out = run_sweep(cfg);
      print_rows(out.table);
      for (const auto& w : out.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::printf("results: %s\nmanifest: %s\nsimd: %s\n", out.results_csv.c_str(),
                  out.manifest_path.c_str(), std::string(simd::backend_name()).c_str());
    } else if (report->parsed()) {
      auto files = emit_plot_data(read_results_csv(results_path), report_dir);
      for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
    } else if (taps->parsed()) {
      CmfbBank bank = design_cmfb(taps_s);
      for (int s = 0; s < bank.S; ++s) {
        for (std::size_t k = 0; k < bank.filters.cols; ++k)
          std::printf("%s%.17g", k ? " " : "", bank.filters.at(static_cast<std::size_t>(s), k));
        std::printf("\n");
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
