#pragma once

#include <filesystem>
#include <optional>

#include "sbsvm/ensemble.hpp"
#include "sbsvm/mfcc_frontend.hpp"

namespace sbsvm {

// Model pack layout ("SBMP1\n" magic): a JSON metadata header (u32 length
// prefix) followed by raw little-endian payload sections. Doubles are stored
// as raw bytes, so save/load round-trips are bit-exact. A plain-text
// <path>.manifest summarizing the pack is written alongside.

void save_subband_ensemble(const std::filesystem::path& path, const SubbandEnsemble& e,
                           const StackedModels* stacked = nullptr);
struct LoadedSubband {
  SubbandEnsemble ensemble;
  std::optional<StackedModels> stacked;
};
LoadedSubband load_subband_ensemble(const std::filesystem::path& path);

void save_mfcc_classifier(const std::filesystem::path& path, const MfccClassifier& clf);
MfccClassifier load_mfcc_classifier(const std::filesystem::path& path);

}  // namespace sbsvm
