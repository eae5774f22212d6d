#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "sbsvm/corpus.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/util.hpp"
#include "sbsvm/wav.hpp"

namespace sbsvm {

namespace {

constexpr double kPi = std::numbers::pi;

struct Partial {
  double freq_hz;
  double amp;
  double decay_frac;  // decay time constant as a fraction of phone duration
};

struct ClassTemplate {
  std::vector<Partial> partials;
  double attack_frac;  // rise time as a fraction of phone duration
};

ClassTemplate class_template(int k, int num_classes) {
  double t = num_classes > 1 ? static_cast<double>(k) / (num_classes - 1) : 0.0;
  double f1 = 350.0 + 3000.0 * t;
  int hi = num_classes > 1 ? ((3 * k + 1) % num_classes) : 0;
  double th = num_classes > 1 ? static_cast<double>(hi) / (num_classes - 1) : 0.0;
  double f2 = 4300.0 + 3100.0 * th;
  double f3 = std::min(7800.0, 2.1 * f1);
  ClassTemplate c;
  c.partials = {Partial{f1, 1.0, 0.55}, Partial{f2, 0.55, 0.4}, Partial{f3, 0.4, 0.45}};
  c.attack_frac = 0.10 + 0.08 * (k % 4);
  return c;
}

std::vector<double> render_phone(const ClassTemplate& tmpl, int n, double jitter, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  double att = tmpl.attack_frac * (1.0 + 0.15 * jitter * rng.uniform(-1.0, 1.0));
  auto n_att = std::max(1, static_cast<int>(att * n));
  for (const auto& p : tmpl.partials) {
    double f = p.freq_hz * (1.0 + 0.015 * jitter * rng.normal());
    double a = p.amp * std::max(0.05, 1.0 + 0.25 * jitter * rng.uniform(-1.0, 1.0));
    double phase = std::min(1.0, jitter) * rng.uniform(-kPi, kPi);
    double tau = p.decay_frac * n * (1.0 + 0.15 * jitter * rng.uniform(-1.0, 1.0));
    double w = 2.0 * kPi * f / 16000.0;
    for (int i = 0; i < n; ++i) {
      double env = i < n_att ? std::sin(0.5 * kPi * (i + 1) / n_att)
                             : std::exp(-(i - n_att) / tau);
      out[static_cast<std::size_t>(i)] += a * env * std::sin(w * i + phase);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> synthetic_class_names(int num_classes) {
  std::vector<std::string> names;
  for (int k = 0; k < num_classes; ++k) names.push_back("c" + std::to_string(k));
  return names;
}

std::vector<Utterance> make_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed) {
  require(spec.num_classes >= 2, "make_synthetic_corpus: need at least 2 classes");
  require(spec.num_utterances >= 1, "make_synthetic_corpus: need at least 1 utterance");
  const int sr = spec.sample_rate;
  const double jit = spec.jitter_scale;
  std::vector<ClassTemplate> templates;
  for (int k = 0; k < spec.num_classes; ++k)
    templates.push_back(class_template(k, spec.num_classes));
  auto names = synthetic_class_names(spec.num_classes);

  auto ms_to_n = [sr](double ms) { return static_cast<int>(std::lround(ms * sr / 1000.0)); };
  auto jittered_len = [&](double lo_ms, double hi_ms, Rng& rng) {
    double mid = 0.5 * (lo_ms + hi_ms);
    double ms = mid + 0.5 * (hi_ms - lo_ms) * std::min(1.0, jit) * rng.uniform(-1.0, 1.0);
    return ms_to_n(ms);
  };

  std::vector<Utterance> utts;
  for (int ui = 0; ui < spec.num_utterances; ++ui) {
    Rng rng(derive_seed(seed, "synth/utt" + std::to_string(ui)));
    Utterance u;
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "synth_%04d", ui);
    u.id = idbuf;
    u.sample_rate = sr;

    int n_phones = static_cast<int>(rng.uniform_int(spec.min_phones, spec.max_phones));
    std::vector<double> audio(static_cast<std::size_t>(ms_to_n(rng.uniform(40.0, 80.0))), 0.0);
    for (int pi = 0; pi < n_phones; ++pi) {
      int cls = static_cast<int>(rng.uniform_int(0, spec.num_classes - 1));
      int len = jittered_len(spec.phone_ms_min, spec.phone_ms_max, rng);
      auto phone = render_phone(templates[static_cast<std::size_t>(cls)], len, jit, rng);
      double peak = 1e-12;
      for (double v : phone) peak = std::max(peak, std::abs(v));
      double loud = 0.35 * std::pow(10.0, 0.15 * std::min(1.0, jit) * rng.uniform(-1.0, 1.0));
      for (double& v : phone) v *= loud / peak;

      auto start = static_cast<std::int64_t>(audio.size());
      audio.insert(audio.end(), phone.begin(), phone.end());
      u.phones.push_back(PhoneSegment{start, static_cast<std::int64_t>(audio.size()),
                                      names[static_cast<std::size_t>(cls)], cls});
      int gap = ms_to_n(rng.uniform(spec.gap_ms_min, spec.gap_ms_max));
      audio.insert(audio.end(), static_cast<std::size_t>(gap), 0.0);
    }
    audio.insert(audio.end(), static_cast<std::size_t>(ms_to_n(rng.uniform(40.0, 80.0))), 0.0);
    u.samples = std::move(audio);
    utts.push_back(std::move(u));
  }
  return utts;
}

void write_corpus(const std::filesystem::path& dir, std::span<const Utterance> utts,
                  const ClassMap& map) {
  std::filesystem::create_directories(dir);
  for (const auto& u : utts) {
    write_wav(dir / (u.id + ".wav"), u.samples, u.sample_rate);
    std::ofstream phn(dir / (u.id + ".phn"));
    require(static_cast<bool>(phn), "write_corpus: cannot write alignments for " + u.id);
    for (const auto& p : u.phones) phn << p.start << ' ' << p.end << ' ' << p.label << '\n';
  }
  map.save(dir / "classmap.txt");
}

}  // namespace sbsvm
