#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sbsvm/corpus.hpp"
#include "sbsvm/filterbank.hpp"
#include "sbsvm/multiclass.hpp"
#include "sbsvm/signal.hpp"
#include "sbsvm/svm.hpp"
#include "sbsvm/util.hpp"

namespace sbsvm {

struct SubbandPipelineConfig {
  int S = 16;
  int T = 10;
  double waveform_window_ms = 100.0;  // K_e input, centered on the phone
  double omega_window_ms = 160.0;     // spans T frames of 25 ms / 15 ms hop
  bool standardize_omega = true;      // per-sentence frame statistics
  int theta = 6;
  double C = 1.0;
  double svm_tol = 1e-3;
  // Experiment hook: replace one subband with seeded noise everywhere.
  int inject_noise_subband = -1;
  std::uint64_t inject_noise_seed = 0;
};

// One phone instance as the subband front-end sees it.
struct SubbandInstance {
  std::string utt_id;
  int class_id = -1;
  Matrix components;          // S x comp_len, from the waveform window
  Matrix omegas;              // S x 3T dynamic features
  std::vector<double> norms;  // per-subband |x^s|^2, cached for the kernels
};

// All phone instances of one utterance. Omega standardization pools the
// sentence's frame log-energies per subband before the deltas are formed.
std::vector<SubbandInstance> extract_subband_instances(const Utterance& u, const CmfbBank& bank,
                                                       const SubbandPipelineConfig& cfg);

struct SubbandEnsemble {
  SubbandPipelineConfig cfg;
  CodingMatrix coding;
  CmfbBank bank;
  std::vector<SubbandInstance> store;               // base training instances
  std::vector<std::vector<BinarySvmModel>> models;  // N x S, support -> store
};

// Base-level training, always on clean data: per pairwise problem and per
// subband, a kernel SVM with K_omega.
SubbandEnsemble train_base(std::vector<SubbandInstance> train, int num_classes,
                           const SubbandPipelineConfig& cfg, int threads = 0);

// Eq.-(7) scores of problem n for all subbands.
std::vector<double> base_scores(const SubbandEnsemble& e, const SubbandInstance& x, int n);

// All N x S base scores of one instance, with the instance-vs-store kernel
// evaluations shared across problems.
Matrix all_base_scores(const SubbandEnsemble& e, const SubbandInstance& x);

// Sum of subband decision signs, integer-valued in [-S, S]; sign(0) = +1.
int majority_vote(std::span<const double> f);

struct EnsembleError {
  double exact;  // binomial tail, independent channels
  double bound;  // (1/2) (4p(1-p))^(S/2)
};
EnsembleError ensemble_error_analytic(double p, int S);

enum class MetaScenario {
  clean,
  multistyle_anechoic,
  multistyle_reverb_matched,
  multistyle_reverb_mismatched,
  matched
};

MetaScenario meta_scenario_from_name(std::string_view name);
std::string_view meta_scenario_name(MetaScenario s);

struct ScenarioSpec {
  MetaScenario kind = MetaScenario::multistyle_anechoic;
  std::vector<double> rir_taps;  // reverb kinds: R (matched) or R' (proxy)
  std::string rir_name;
  CorruptionSpec matched;  // kind == matched copies the test condition
};

struct StackedModels {
  std::vector<LinearSvmModel> weights;  // per problem
  std::vector<char> trained;            // 0 = majority-voting fallback
  int n_fallback = 0;
};

// Meta-level training on the dev subset under the given scenario; the
// multi-style kinds mix clean and white-0dB copies 1:1.
StackedModels train_stacked(const SubbandEnsemble& e, std::span<const Utterance> dev,
                            const ScenarioSpec& scenario, std::uint64_t seed, int threads = 0);

// N-vector of meta-level scores: stacked where trained (falling back to
// majority voting), or pure majority voting when meta == nullptr.
std::vector<double> subband_problem_scores(const SubbandEnsemble& e, const StackedModels* meta,
                                           const SubbandInstance& x);

// Per-subband (mean, population std) of stacked weights across the trained
// binary problems.
Matrix weight_report(const StackedModels& meta, int S);

}  // namespace sbsvm
