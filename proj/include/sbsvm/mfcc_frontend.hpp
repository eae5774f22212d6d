#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sbsvm/corpus.hpp"
#include "sbsvm/features.hpp"
#include "sbsvm/gmm.hpp"
#include "sbsvm/multiclass.hpp"
#include "sbsvm/signal.hpp"
#include "sbsvm/svm.hpp"

namespace sbsvm {

enum class MfccScenarioKind { anechoic_vts, reverb_matched_vts, reverb_mismatched_vts, matched };

MfccScenarioKind mfcc_scenario_from_name(std::string_view name);
std::string_view mfcc_scenario_name(MfccScenarioKind k);

struct MfccScenario {
  MfccScenarioKind kind = MfccScenarioKind::anechoic_vts;
  std::vector<double> train_rir_taps;  // reverb kinds: RIR applied to training audio
  std::string train_rir_name;
  CorruptionSpec matched;  // kind == matched: identical train corruption
  bool use_vts = true;     // VTS compensation of test log-mel (non-matched kinds)
};

struct MfccFrontendConfig {
  MfccConfig mfcc;
  int theta = 6;
  double C = 1.0;
  double svm_tol = 1e-3;
  int gmm_components = 64;
  std::uint64_t gmm_seed = 1;
};

// Cepstral baseline: 390-dim concatenated CMVN'd features, pairwise ECOC of
// polynomial-kernel SVMs, optional VTS in the log-mel domain.
struct MfccClassifier {
  MfccFrontendConfig cfg;
  MfccScenario scenario;
  CodingMatrix coding;
  std::vector<std::vector<double>> store;  // training features, 390-dim
  std::vector<int> store_class;
  std::vector<BinarySvmModel> models;  // per problem
  GmmModel vts_gmm;                    // on clean (scenario-consistent) log-mel
  bool has_gmm = false;
};

// Per-scenario training: the scenario's corruption is applied to the training
// audio before feature extraction; the VTS GMM is trained on the
// scenario-consistent clean log-mel frames.
MfccClassifier train_mfcc_classifier(std::span<const Utterance> train_clean, int num_classes,
                                     const MfccScenario& scenario, const MfccFrontendConfig& cfg,
                                     int threads = 0);

// 390-dim features of every phone of an (already corrupted) utterance,
// with VTS compensation when enabled.
std::vector<std::vector<double>> mfcc_instance_features(const Utterance& u,
                                                        const MfccClassifier& clf);

// N-vector of pairwise scores for one instance.
std::vector<double> mfcc_problem_scores(const MfccClassifier& clf,
                                        std::span<const double> feature);

// Decoded class for each phone of the utterance (hinge loss).
std::vector<int> classify_mfcc(const MfccClassifier& clf, const Utterance& corrupted);

}  // namespace sbsvm
