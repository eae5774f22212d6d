#pragma once

#include <span>
#include <vector>

#include "sbsvm/corpus.hpp"
#include "sbsvm/util.hpp"

namespace sbsvm {

// ---- dynamic subband features -----------------------------------------

// T log frame energies of a subband component, frames centered in the
// component: omega_t = log(max(|frame_t|^2, 1e-10)).
std::vector<double> log_frame_energies(std::span<const double> component, int T, int frame_len,
                                       int hop);

// +/-window regression differences with edge replication (Furui deltas).
std::vector<double> delta_sequence(std::span<const double> x, int window = 2);

// [omega, delta omega, delta^2 omega], dimension 3T.
std::vector<double> assemble_dynamic_feature(std::span<const double> omega);

// Frame geometry of the omega window in subband-domain samples: 25 ms frames
// every 15 ms (10 ms overlap) at the decimated rate, rounded when S does not
// divide them exactly.
struct OmegaFraming {
  int T = 10;
  int frame_len = 0;
  int hop = 0;
  int span() const { return frame_len + (T - 1) * hop; }
};
OmegaFraming omega_framing(int S, int T = 10, double frame_ms = 25.0, double overlap_ms = 10.0,
                           int sample_rate = 16000);

// ---- MFCC pipeline ------------------------------------------------------

struct MfccConfig {
  double preemphasis = 0.97;
  int frame_len = 400;  // 25 ms at 16 kHz
  int hop = 160;        // 100 frames/sec
  int nfft = 512;
  int nmel = 26;
  int nceps = 13;  // c0..c12
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double log_floor = 1e-10;
  int delta_window = 2;
  int concat_frames = 10;  // frames closest to the phone center
  int sample_rate = 16000;
};

// Triangular mel filters, rows = nmel, cols = nfft/2 + 1.
Matrix mel_filterbank(const MfccConfig& cfg);

// Hamming-windowed, pre-emphasized power spectra -> floored log mel energies.
// Rows = floor((len - frame_len)/hop) + 1 frames.
Matrix log_mel_sequence(std::span<const double> samples, const MfccConfig& cfg);

// Orthonormal DCT-II of each log-mel row, first nceps coefficients.
Matrix mfcc_from_log_mel(const Matrix& log_mel, const MfccConfig& cfg);

// Appends delta and delta-delta blocks: d columns become 3d.
Matrix add_deltas(const Matrix& frames, int window = 2);

// Per-dimension zero mean / unit variance across the sentence, in place.
// Constant dimensions map to zero. Errors with fewer than 2 frames.
void cmvn(Matrix& frames);

// Concatenates the `concat_frames` frames whose centers are nearest to
// phone_center (contiguous run, clamped at the sentence edges) in time order.
std::vector<double> concat_center(const Matrix& frames, std::int64_t phone_center,
                                  const MfccConfig& cfg);

// Full per-utterance baseline: log-mel -> (optional hook between) -> DCT ->
// deltas -> CMVN. Kept in pieces so the VTS path can compensate log-mel first.
Matrix mfcc_sequence(std::span<const double> samples, const MfccConfig& cfg);

}  // namespace sbsvm
