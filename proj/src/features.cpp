#include "sbsvm/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sbsvm/fft.hpp"
#include "sbsvm/simd.hpp"

namespace sbsvm {

std::vector<double> log_frame_energies(std::span<const double> component, int T, int frame_len,
                                       int hop) {
  require(T >= 1 && frame_len >= 1 && hop >= 1, "log_frame_energies: bad framing");
  const int span = frame_len + (T - 1) * hop;
  require(static_cast<int>(component.size()) >= span,
          "log_frame_energies: component too short, need >= " + std::to_string(span) +
              " samples, got " + std::to_string(component.size()));
  const auto start0 = (component.size() - static_cast<std::size_t>(span)) / 2;
  std::vector<double> omega(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    double e = simd::sumsq(component.data() + start0 + static_cast<std::size_t>(t) * hop,
                           static_cast<std::size_t>(frame_len));
    omega[static_cast<std::size_t>(t)] = std::log(std::max(e, 1e-10));
  }
  return omega;
}

std::vector<double> delta_sequence(std::span<const double> x, int window) {
  require(window >= 1, "delta_sequence: window must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  double denom = 0;
  for (int t = 1; t <= window; ++t) denom += 2.0 * t * t;
  std::vector<double> d(x.size());
  auto clamped = [&](std::ptrdiff_t i) {
    return x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, n - 1))];
  };
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double num = 0;
    for (int t = 1; t <= window; ++t) num += t * (clamped(i + t) - clamped(i - t));
    d[static_cast<std::size_t>(i)] = num / denom;
  }
  return d;
}

std::vector<double> assemble_dynamic_feature(std::span<const double> omega) {
  auto d1 = delta_sequence(omega);
  auto d2 = delta_sequence(d1);
  std::vector<double> out;
  out.reserve(3 * omega.size());
  out.insert(out.end(), omega.begin(), omega.end());
  out.insert(out.end(), d1.begin(), d1.end());
  out.insert(out.end(), d2.begin(), d2.end());
  return out;
}

OmegaFraming omega_framing(int S, int T, double frame_ms, double overlap_ms, int sample_rate) {
  require(S >= 1, "omega_framing: S must be >= 1");
  OmegaFraming f;
  f.T = T;
  double sub_rate = static_cast<double>(sample_rate) / S;
  f.frame_len = std::max(1, static_cast<int>(std::lround(frame_ms / 1000.0 * sub_rate)));
  f.hop = std::max(1, static_cast<int>(std::lround((frame_ms - overlap_ms) / 1000.0 * sub_rate)));
  return f;
}

Matrix mel_filterbank(const MfccConfig& cfg) {
  auto hz_to_mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto mel_to_hz = [](double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); };
  const std::size_t nbins = static_cast<std::size_t>(cfg.nfft) / 2 + 1;
  Matrix fb(static_cast<std::size_t>(cfg.nmel), nbins);
  double mel_lo = hz_to_mel(cfg.fmin_hz), mel_hi = hz_to_mel(cfg.fmax_hz);
  std::vector<double> edges(static_cast<std::size_t>(cfg.nmel) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(cfg.nmel + 1));
  for (int m = 0; m < cfg.nmel; ++m) {
    double lo = edges[static_cast<std::size_t>(m)], mid = edges[static_cast<std::size_t>(m) + 1],
           hi = edges[static_cast<std::size_t>(m) + 2];
    for (std::size_t k = 0; k < nbins; ++k) {
      double f = static_cast<double>(k) * cfg.sample_rate / cfg.nfft;
      double v = 0;
      if (f > lo && f < mid) v = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi) v = (hi - f) / (hi - mid);
      fb.at(static_cast<std::size_t>(m), k) = v;
    }
  }
  return fb;
}

Matrix log_mel_sequence(std::span<const double> samples, const MfccConfig& cfg) {
  require(static_cast<int>(samples.size()) >= cfg.frame_len,
          "log_mel_sequence: utterance shorter than one frame");
  const std::size_t n_frames =
      (samples.size() - static_cast<std::size_t>(cfg.frame_len)) /
          static_cast<std::size_t>(cfg.hop) +
      1;
  std::vector<double> window(static_cast<std::size_t>(cfg.frame_len));
  for (int i = 0; i < cfg.frame_len; ++i)
    window[static_cast<std::size_t>(i)] =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (cfg.frame_len - 1));
  Matrix fb = mel_filterbank(cfg);
  Matrix out(n_frames, static_cast<std::size_t>(cfg.nmel));
  std::vector<double> frame(static_cast<std::size_t>(cfg.frame_len));
  for (std::size_t t = 0; t < n_frames; ++t) {
    const double* src = samples.data() + t * static_cast<std::size_t>(cfg.hop);
    // Pre-emphasis within the frame, sample -1 replicated from sample 0, so
    // each frame depends only on its own samples (shift covariance).
    frame[0] = (src[0] - cfg.preemphasis * src[0]) * window[0];
    for (int i = 1; i < cfg.frame_len; ++i)
      frame[static_cast<std::size_t>(i)] =
          (src[i] - cfg.preemphasis * src[i - 1]) * window[static_cast<std::size_t>(i)];
    auto power = power_spectrum(frame, static_cast<std::size_t>(cfg.nfft));
    for (int m = 0; m < cfg.nmel; ++m) {
      double e = simd::dot(fb.row(static_cast<std::size_t>(m)).data(), power.data(), power.size());
      out.at(t, static_cast<std::size_t>(m)) = std::log(std::max(e, cfg.log_floor));
    }
  }
  return out;
}

Matrix mfcc_from_log_mel(const Matrix& log_mel, const MfccConfig& cfg) {
  const auto nmel = static_cast<int>(log_mel.cols);
  Matrix dct(static_cast<std::size_t>(cfg.nceps), log_mel.cols);
  for (int j = 0; j < cfg.nceps; ++j) {
    double scale = std::sqrt((j == 0 ? 1.0 : 2.0) / nmel);
    for (int m = 0; m < nmel; ++m)
      dct.at(static_cast<std::size_t>(j), static_cast<std::size_t>(m)) =
          scale * std::cos(std::numbers::pi * j * (m + 0.5) / nmel);
  }
  Matrix out(log_mel.rows, static_cast<std::size_t>(cfg.nceps));
  for (std::size_t t = 0; t < log_mel.rows; ++t)
    for (int j = 0; j < cfg.nceps; ++j)
      out.at(t, static_cast<std::size_t>(j)) =
          simd::dot(dct.row(static_cast<std::size_t>(j)).data(), log_mel.row(t).data(),
                    log_mel.cols);
  return out;
}

Matrix add_deltas(const Matrix& frames, int window) {
  Matrix out(frames.rows, frames.cols * 3);
  std::vector<double> col(frames.rows);
  for (std::size_t c = 0; c < frames.cols; ++c) {
    for (std::size_t t = 0; t < frames.rows; ++t) col[t] = frames.at(t, c);
    auto d1 = delta_sequence(col, window);
    auto d2 = delta_sequence(d1, window);
    for (std::size_t t = 0; t < frames.rows; ++t) {
      out.at(t, c) = col[t];
      out.at(t, frames.cols + c) = d1[t];
      out.at(t, 2 * frames.cols + c) = d2[t];
    }
  }
  return out;
}

void cmvn(Matrix& frames) {
  require(frames.rows >= 2, "cmvn: need at least 2 frames");
  const auto n = static_cast<double>(frames.rows);
  for (std::size_t c = 0; c < frames.cols; ++c) {
    double mean = 0;
    for (std::size_t t = 0; t < frames.rows; ++t) mean += frames.at(t, c);
    mean /= n;
    double var = 0;
    for (std::size_t t = 0; t < frames.rows; ++t) {
      double d = frames.at(t, c) - mean;
      var += d * d;
    }
    var /= n;
    if (var <= 0) {
      for (std::size_t t = 0; t < frames.rows; ++t) frames.at(t, c) = 0.0;
    } else {
      double inv = 1.0 / std::sqrt(var);
      for (std::size_t t = 0; t < frames.rows; ++t) frames.at(t, c) = (frames.at(t, c) - mean) * inv;
    }
  }
}

std::vector<double> concat_center(const Matrix& frames, std::int64_t phone_center,
                                  const MfccConfig& cfg) {
  const int T = cfg.concat_frames;
  require(frames.rows >= static_cast<std::size_t>(T),
          "concat_center: utterance has fewer than " + std::to_string(T) + " frames");
  // Frame t covers samples [hop t, hop t + frame_len); pick the contiguous
  // run of T frames whose window center is nearest the phone center.
  auto center_of = [&](std::ptrdiff_t t) {
    return static_cast<double>(t) * cfg.hop + 0.5 * cfg.frame_len;
  };
  const auto max_start = static_cast<std::ptrdiff_t>(frames.rows) - T;
  double ideal = (static_cast<double>(phone_center) - 0.5 * cfg.frame_len) / cfg.hop -
                 0.5 * (T - 1);
  auto start = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::lround(ideal)), 0,
                                          max_start);
  // Local scan guards against rounding at the boundary.
  auto run_center = [&](std::ptrdiff_t s) { return 0.5 * (center_of(s) + center_of(s + T - 1)); };
  for (std::ptrdiff_t cand : {start - 1, start + 1}) {
    if (cand >= 0 && cand <= max_start &&
        std::abs(run_center(cand) - static_cast<double>(phone_center)) <
            std::abs(run_center(start) - static_cast<double>(phone_center)))
      start = cand;
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(T) * frames.cols);
  for (int t = 0; t < T; ++t) {
    auto row = frames.row(static_cast<std::size_t>(start + t));
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

Matrix mfcc_sequence(std::span<const double> samples, const MfccConfig& cfg) {
  Matrix logmel = log_mel_sequence(samples, cfg);
  Matrix ceps = mfcc_from_log_mel(logmel, cfg);
  Matrix full = add_deltas(ceps, cfg.delta_window);
  cmvn(full);
  return full;
}

}  // namespace sbsvm
