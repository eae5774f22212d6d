#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sbsvm {

enum class NoiseKind { white, pink, file };

NoiseKind noise_kind_from_name(std::string_view name);
std::string_view noise_kind_name(NoiseKind k);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::white;
  std::filesystem::path path;  // kind == file
  std::uint64_t seed = 0;
  bool allow_tiling = true;  // file noise shorter than the utterance
};

// y = x / sqrt(mean(x^2)); errors on an all-zero signal.
std::vector<double> normalize_unit_energy(std::span<const double> x);

// White: i.i.d. standard normal. Pink: white shaped in the frequency domain
// with gain 1/sqrt(f) (DC bin copied from bin 1), inverse transformed, then
// rescaled to unit mean square.
std::vector<double> gen_noise(NoiseKind kind, std::size_t n, std::uint64_t seed);

// Adds noise scaled to mean square 10^(-snr_db/10); `clean` must already be
// unit energy per sample so that the sentence-level SNR comes out exact.
std::vector<double> mix_at_snr(std::span<const double> clean, const NoiseSpec& noise,
                               double snr_db);

struct Rir {
  std::vector<double> taps;  // peak |tap| normalized to 1
  std::string name;
};

// Mono PCM WAV or single-column text floats, chosen by content sniffing on
// the RIFF magic. Taps are renormalized to peak 1.
Rir load_rir(const std::filesystem::path& path);

// Synthetic exponentially decaying response with a sparse early-reflection
// pattern; T60 is the 60 dB decay time.
Rir make_synthetic_rir(double t60_seconds, std::uint64_t seed, const std::string& name,
                       int sample_rate = 16000);

// The two reference responses R and R' (same decay, different reflections)
// used by the reverberant scenarios.
std::pair<Rir, Rir> make_reference_rirs(int sample_rate = 16000);

// Full linear convolution truncated to len(x); head-aligned, so sample n of
// the output depends on input samples <= n.
std::vector<double> convolve_rir(std::span<const double> x, const Rir& r);

// 20*log10(geometric mean / arithmetic mean) of |DFT| over all 8192 bins;
// 0 dB for a flat (impulse) response, strictly negative otherwise.
double spectral_coloration(const Rir& r);
inline constexpr std::size_t kColorationFftBins = 8192;

// One fully resolved test/training condition applied to a normalized
// utterance: optional additive noise at a sentence-level SNR, then optional
// reverberation. Self-contained (taps copied in) so it can be hashed into
// cache keys.
struct CorruptionSpec {
  bool quiet = true;  // no additive noise
  NoiseKind noise = NoiseKind::white;
  std::filesystem::path noise_file;
  double snr_db = 0.0;
  std::vector<double> rir_taps;  // empty = anechoic
  std::string rir_name;
  std::uint64_t seed = 0;
};

// Per-utterance noise seeds derive from (spec.seed, utterance id), so a
// corpus corruption is reproducible and order-independent.
std::vector<double> corrupt_samples(std::span<const double> normalized, std::string_view utt_id,
                                    const CorruptionSpec& spec);

// Stable text form used both for cache keys and the run manifest.
std::string corruption_tag(const CorruptionSpec& spec);

struct NoiseVarianceMethod {
  enum class Kind { frame_percentile, known } kind = Kind::frame_percentile;
  double known_value = 0.0;
  double percentile = 0.10;   // of 25 ms frame energies
  int frame_len = 400;        // 25 ms at 16 kHz
  int hop = 160;              // 10 ms
};

// Noise mean-square estimate per sample for unit-energy speech. The default
// tracks the noise floor as a low percentile of frame energies.
double estimate_noise_variance(std::span<const double> noisy,
                               const NoiseVarianceMethod& method = {});

}  // namespace sbsvm
