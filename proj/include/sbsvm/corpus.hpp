#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace sbsvm {

// Label folding plus confusion groups. Loaded from a plain-text file of
//   fold <raw-label> <class-name>
//   drop <raw-label>
//   group <name> <class-name> <class-name> ...
// lines; class ids follow first appearance of a class name in a fold line.
struct ClassMap {
  std::vector<std::string> class_names;            // index = class id
  std::unordered_map<std::string, int> fold;       // raw label -> class id
  std::unordered_set<std::string> dropped;         // e.g. glottal stop "q"
  std::vector<int> group_of;                       // class id -> group id, -1 = none
  int num_groups = 0;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  bool same_group(int a, int b) const {
    return a == b || (group_of[static_cast<std::size_t>(a)] >= 0 &&
                      group_of[static_cast<std::size_t>(a)] == group_of[static_cast<std::size_t>(b)]);
  }

  static ClassMap load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // Identity fold over `names`, no groups (synthetic corpora).
  static ClassMap identity(const std::vector<std::string>& names);
};

struct PhoneSegment {
  std::int64_t start = 0;  // sample index, inclusive
  std::int64_t end = 0;    // sample index, exclusive
  std::string label;       // raw label
  int class_id = -1;       // folded
};

struct Utterance {
  std::string id;
  std::vector<double> samples;
  int sample_rate = 16000;
  std::vector<PhoneSegment> phones;
};

struct LoadError {
  std::string file;
  std::string message;
};

struct LoadResult {
  std::vector<Utterance> utterances;
  std::vector<LoadError> errors;
};

// Reads <id>.wav / <id>.phn pairs (alignments: "start end label" per line in
// sample units). Folds labels, drops segments whose label the map drops, and
// validates ordering/ranges. Files with problems land in `errors` rather
// than being silently skipped.
LoadResult load_corpus(const std::filesystem::path& audio_dir,
                       const std::filesystem::path& alignment_dir, const ClassMap& map);

// round(window_ms * 16) samples centered at floor((start+end)/2), zero-padded
// at utterance edges.
std::vector<double> extract_segment(const Utterance& u, const PhoneSegment& p,
                                    double window_ms = 100.0);

// Deterministic uniform sample without replacement; size round(fraction * n);
// output preserves input order.
std::vector<std::size_t> sample_dev_subset(std::size_t n, double fraction, std::uint64_t seed);

// ---- synthetic corpus -------------------------------------------------

struct SynthSpec {
  int num_classes = 8;
  int num_utterances = 48;
  int min_phones = 5, max_phones = 15;
  double phone_ms_min = 90, phone_ms_max = 150;
  double gap_ms_min = 25, gap_ms_max = 60;
  // Scales all per-instance randomness (amplitude, pitch, phase, envelope);
  // 0 gives pure class templates, larger values shrink the class margin.
  double jitter_scale = 1.0;
  int sample_rate = 16000;
};

// Classes are sums of damped sinusoids at class-specific frequencies with
// formant-like attack/decay envelopes; utterances are phone instances
// separated by silence. Deterministic for a fixed (spec, seed).
std::vector<Utterance> make_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed);

std::vector<std::string> synthetic_class_names(int num_classes);

// Writes <id>.wav + <id>.phn per utterance plus classmap.txt, the same
// external format load_corpus reads.
void write_corpus(const std::filesystem::path& dir, std::span<const Utterance> utts,
                  const ClassMap& map);

}  // namespace sbsvm
