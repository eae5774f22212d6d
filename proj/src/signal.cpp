#include "sbsvm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "sbsvm/fft.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/simd.hpp"
#include "sbsvm/util.hpp"
#include "sbsvm/wav.hpp"

namespace sbsvm {

NoiseKind noise_kind_from_name(std::string_view name) {
  if (name == "white") return NoiseKind::white;
  if (name == "pink") return NoiseKind::pink;
  if (name == "file") return NoiseKind::file;
  throw std::invalid_argument("unknown noise kind: " + std::string(name));
}

std::string_view noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::white: return "white";
    case NoiseKind::pink: return "pink";
    case NoiseKind::file: return "file";
  }
  return "?";
}

std::vector<double> normalize_unit_energy(std::span<const double> x) {
  require(!x.empty(), "normalize_unit_energy: empty input");
  double ms = simd::sumsq(x) / static_cast<double>(x.size());
  require(ms > 0.0, "normalize_unit_energy: all-zero input");
  std::vector<double> y(x.begin(), x.end());
  simd::scale(1.0 / std::sqrt(ms), y.data(), y.size());
  return y;
}

std::vector<double> gen_noise(NoiseKind kind, std::size_t n, std::uint64_t seed) {
  require(n > 0, "gen_noise: n must be positive");
  Rng rng(seed);
  std::vector<double> w(n);
  for (auto& v : w) v = rng.normal();
  if (kind == NoiseKind::white) return w;
  require(kind == NoiseKind::pink, "gen_noise: kind must be white or pink");

  // 1/sqrt(f) spectral shaping of the white draw: exact -3 dB/octave power
  // slope with no IIR approximation error.
  auto spec = fft_real(w, n);
  std::vector<double> gain(n, 0.0);
  for (std::size_t k = 1; k <= n / 2; ++k) gain[k] = 1.0 / std::sqrt(static_cast<double>(k));
  gain[0] = gain[1];
  for (std::size_t k = n / 2 + 1; k < n; ++k) gain[k] = gain[n - k];
  for (std::size_t k = 0; k < n; ++k) spec[k] *= gain[k];
  auto pink = ifft_to_real(spec);
  double ms = simd::sumsq(pink.data(), n) / static_cast<double>(n);
  simd::scale(1.0 / std::sqrt(ms), pink.data(), n);
  return pink;
}

namespace {

std::vector<double> noise_for(const NoiseSpec& spec, std::size_t n) {
  if (spec.kind != NoiseKind::file) return gen_noise(spec.kind, n, spec.seed);
  WavData w = read_wav(spec.path);
  if (w.samples.size() >= n) {
    // Random start offset so distinct seeds see distinct stretches.
    Rng rng(spec.seed);
    std::size_t max_off = w.samples.size() - n;
    std::size_t off = max_off == 0 ? 0 : static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_off)));
    return {w.samples.begin() + static_cast<std::ptrdiff_t>(off),
            w.samples.begin() + static_cast<std::ptrdiff_t>(off + n)};
  }
  require(spec.allow_tiling, "noise file shorter than utterance and tiling disabled: " +
                                 spec.path.string());
  Rng rng(spec.seed);
  std::size_t off = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(w.samples.size()) - 1));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = w.samples[(off + i) % w.samples.size()];
  return out;
}

}  // namespace

std::vector<double> mix_at_snr(std::span<const double> clean, const NoiseSpec& spec,
                               double snr_db) {
  require(!clean.empty(), "mix_at_snr: empty input");
  std::vector<double> noise = noise_for(spec, clean.size());
  double target_ms = std::pow(10.0, -snr_db / 10.0);
  double ms = simd::sumsq(noise.data(), noise.size()) / static_cast<double>(noise.size());
  require(ms > 0.0, "mix_at_snr: degenerate noise (zero energy)");
  simd::scale(std::sqrt(target_ms / ms), noise.data(), noise.size());
  std::vector<double> out(clean.begin(), clean.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += noise[i];
  return out;
}

Rir load_rir(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  require(static_cast<bool>(probe), "load_rir: cannot open " + path.string());
  char magic[4] = {};
  probe.read(magic, 4);
  Rir r;
  r.name = path.stem().string();
  if (probe.gcount() == 4 && std::string_view(magic, 4) == "RIFF") {
    r.taps = read_wav(path).samples;
  } else {
    probe.seekg(0);
    double v;
    while (probe >> v) r.taps.push_back(v);
    require(probe.eof(), "load_rir: malformed text RIR " + path.string());
  }
  require(!r.taps.empty(), "load_rir: empty response " + path.string());
  double peak = 0;
  for (double t : r.taps) peak = std::max(peak, std::abs(t));
  require(peak > 0, "load_rir: all-zero response " + path.string());
  simd::scale(1.0 / peak, r.taps.data(), r.taps.size());
  return r;
}

Rir make_synthetic_rir(double t60_seconds, std::uint64_t seed, const std::string& name,
                       int sample_rate) {
  require(t60_seconds > 0, "make_synthetic_rir: T60 must be positive");
  Rng rng(seed);
  auto n = static_cast<std::size_t>(std::lround(1.25 * t60_seconds * sample_rate));
  std::vector<double> h(n, 0.0);
  h[0] = 1.0;  // direct path
  // A handful of discrete early reflections in the first 25 ms.
  int n_early = static_cast<int>(rng.uniform_int(4, 7));
  for (int i = 0; i < n_early; ++i) {
    auto lag = static_cast<std::size_t>(rng.uniform_int(sample_rate / 500, sample_rate / 40));
    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    if (lag < n) h[lag] += sign * rng.uniform(0.3, 0.7);
  }
  // Diffuse tail: white noise under the T60 amplitude envelope 10^(-3 t/T60).
  double decay = -3.0 * std::numbers::ln10 / (t60_seconds * sample_rate);
  for (std::size_t t = 1; t < n; ++t) h[t] += 0.35 * rng.normal() * std::exp(decay * static_cast<double>(t));
  double peak = 0;
  for (double t : h) peak = std::max(peak, std::abs(t));
  simd::scale(1.0 / peak, h.data(), h.size());
  return Rir{std::move(h), name};
}

std::pair<Rir, Rir> make_reference_rirs(int sample_rate) {
  return {make_synthetic_rir(0.2, 0x51d0001ULL, "R", sample_rate),
          make_synthetic_rir(0.2, 0x51d0002ULL, "Rprime", sample_rate)};
}

std::vector<double> convolve_rir(std::span<const double> x, const Rir& r) {
  require(!r.taps.empty(), "convolve_rir: empty impulse response");
  std::vector<double> y(x.size(), 0.0);
  std::size_t kmax = std::min(r.taps.size(), x.size());
  for (std::size_t k = 0; k < kmax; ++k) {
    if (r.taps[k] != 0.0) simd::axpy(r.taps[k], x.data(), y.data() + k, x.size() - k);
  }
  return y;
}

double spectral_coloration(const Rir& r) {
  require(!r.taps.empty(), "spectral_coloration: empty response");
  require(simd::sumsq(r.taps.data(), r.taps.size()) > 0, "spectral_coloration: zero filter");
  // DFT-grid sampling of the DTFT: taps beyond the grid wrap (alias) onto it.
  std::vector<double> wrapped(kColorationFftBins, 0.0);
  for (std::size_t i = 0; i < r.taps.size(); ++i) wrapped[i % kColorationFftBins] += r.taps[i];
  auto spec = fft_real(wrapped, kColorationFftBins);
  double log_sum = 0.0, lin_sum = 0.0;
  for (const auto& c : spec) {
    double mag = std::max(std::abs(c), 1e-300);
    log_sum += std::log(mag);
    lin_sum += mag;
  }
  double geo = std::exp(log_sum / static_cast<double>(spec.size()));
  double arith = lin_sum / static_cast<double>(spec.size());
  return 20.0 * std::log10(geo / arith);
}

std::vector<double> corrupt_samples(std::span<const double> normalized, std::string_view utt_id,
                                    const CorruptionSpec& spec) {
  std::vector<double> out(normalized.begin(), normalized.end());
  if (!spec.quiet) {
    NoiseSpec ns;
    ns.kind = spec.noise;
    ns.path = spec.noise_file;
    ns.seed = derive_seed(spec.seed, std::string("noise/") + std::string(utt_id));
    out = mix_at_snr(out, ns, spec.snr_db);
  }
  if (!spec.rir_taps.empty()) {
    Rir r{spec.rir_taps, spec.rir_name};
    out = convolve_rir(out, r);
  }
  return out;
}

std::string corruption_tag(const CorruptionSpec& spec) {
  std::string tag;
  if (spec.quiet) {
    tag = "quiet";
  } else {
    tag = std::string(noise_kind_name(spec.noise));
    if (spec.noise == NoiseKind::file) tag += ":" + spec.noise_file.filename().string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "@%gdB", spec.snr_db);
    tag += buf;
  }
  if (!spec.rir_taps.empty()) tag += "+rir:" + spec.rir_name;
  tag += "#s" + std::to_string(spec.seed);
  return tag;
}

double estimate_noise_variance(std::span<const double> noisy, const NoiseVarianceMethod& method) {
  if (method.kind == NoiseVarianceMethod::Kind::known) return method.known_value;
  auto flen = static_cast<std::size_t>(method.frame_len);
  require(noisy.size() >= flen, "estimate_noise_variance: input shorter than one frame");
  std::vector<double> energies;
  for (std::size_t start = 0; start + flen <= noisy.size();
       start += static_cast<std::size_t>(method.hop)) {
    energies.push_back(simd::sumsq(noisy.data() + start, flen) / static_cast<double>(flen));
  }
  std::sort(energies.begin(), energies.end());
  auto idx = static_cast<std::size_t>(method.percentile * static_cast<double>(energies.size() - 1));
  return energies[idx];
}

}  // namespace sbsvm
