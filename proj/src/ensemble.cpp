#include "sbsvm/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "sbsvm/features.hpp"
#include "sbsvm/kernels.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/simd.hpp"

namespace sbsvm {

namespace {

// K_omega between two featurized instances in subband s, with the zero-norm
// (digital silence) rule: the even factor collapses to 0.
double komega_cached(const SubbandInstance& a, const SubbandInstance& b, std::size_t s,
                     int theta) {
  double sx = a.norms[s], sy = b.norms[s];
  if (sx == 0.0 || sy == 0.0) return 0.0;
  double c = cosine_from_parts(simd::dot(a.components.row(s), b.components.row(s)), sx, sy);
  double even = ipow(1.0 + c, theta) + ipow(1.0 - c, theta);
  return even * ipow(1.0 + simd::dot(a.omegas.row(s), b.omegas.row(s)), theta);
}

}  // namespace

std::vector<SubbandInstance> extract_subband_instances(const Utterance& u, const CmfbBank& bank,
                                                       const SubbandPipelineConfig& cfg) {
  require(bank.S == cfg.S, "extract_subband_instances: bank does not match config");
  const auto S = static_cast<std::size_t>(cfg.S);
  const OmegaFraming framing = omega_framing(cfg.S, cfg.T);
  std::vector<SubbandInstance> out;
  if (u.phones.empty()) return out;

  // Raw frame energies first; omega standardization pools the whole sentence.
  std::vector<Matrix> omega_raw;  // per phone: S x T
  for (std::size_t pi = 0; pi < u.phones.size(); ++pi) {
    const auto& p = u.phones[pi];
    SubbandInstance inst;
    inst.utt_id = u.id;
    inst.class_id = p.class_id;
    auto wave = extract_segment(u, p, cfg.waveform_window_ms);
    auto wide = extract_segment(u, p, cfg.omega_window_ms);
    SubbandSet sb_wave = analyze(wave, bank);
    SubbandSet sb_wide = analyze(wide, bank);
    if (cfg.inject_noise_subband >= 0 && cfg.inject_noise_subband < cfg.S) {
      auto s0 = static_cast<std::size_t>(cfg.inject_noise_subband);
      double total = 0;
      for (std::size_t s = 0; s < S; ++s) total += simd::sumsq(sb_wave.components.row(s));
      double rms = std::sqrt(total / static_cast<double>(S * sb_wave.components.cols));
      Rng rw(derive_seed(cfg.inject_noise_seed, u.id + "/w" + std::to_string(pi)));
      for (auto& v : sb_wave.components.row(s0)) v = rms * rw.normal();
      Rng ro(derive_seed(cfg.inject_noise_seed, u.id + "/o" + std::to_string(pi)));
      for (auto& v : sb_wide.components.row(s0)) v = rms * ro.normal();
    }
    Matrix raw(S, static_cast<std::size_t>(cfg.T));
    for (std::size_t s = 0; s < S; ++s) {
      auto omega = log_frame_energies(sb_wide.components.row(s), cfg.T, framing.frame_len,
                                      framing.hop);
      std::copy(omega.begin(), omega.end(), raw.row(s).begin());
    }
    omega_raw.push_back(std::move(raw));
    inst.components = std::move(sb_wave.components);
    inst.norms.resize(S);
    for (std::size_t s = 0; s < S; ++s) inst.norms[s] = simd::sumsq(inst.components.row(s));
    out.push_back(std::move(inst));
  }

  for (std::size_t s = 0; s < S; ++s) {
    double mean = 0, var = 0;
    const double n = static_cast<double>(omega_raw.size() * static_cast<std::size_t>(cfg.T));
    if (cfg.standardize_omega) {
      for (const auto& m : omega_raw)
        for (double v : m.row(s)) mean += v;
      mean /= n;
      for (const auto& m : omega_raw)
        for (double v : m.row(s)) var += (v - mean) * (v - mean);
      var /= n;
    }
    double inv = (cfg.standardize_omega && var > 0) ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t pi = 0; pi < out.size(); ++pi) {
      std::vector<double> omega(omega_raw[pi].row(s).begin(), omega_raw[pi].row(s).end());
      if (cfg.standardize_omega)
        for (auto& v : omega) v = (v - mean) * inv;
      auto dyn = assemble_dynamic_feature(omega);
      if (out[pi].omegas.rows == 0) out[pi].omegas = Matrix(S, dyn.size());
      std::copy(dyn.begin(), dyn.end(), out[pi].omegas.row(s).begin());
    }
  }
  return out;
}

SubbandEnsemble train_base(std::vector<SubbandInstance> train, int num_classes,
                           const SubbandPipelineConfig& cfg, int threads) {
  require(!train.empty(), "train_base: no training instances");
  SubbandEnsemble e;
  e.cfg = cfg;
  e.coding = build_pairwise(num_classes);
  e.bank = design_cmfb(cfg.S);
  e.store = std::move(train);

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t t = 0; t < e.store.size(); ++t) {
    int c = e.store[t].class_id;
    require(c >= 0 && c < num_classes, "train_base: instance with class id out of range");
    by_class[static_cast<std::size_t>(c)].push_back(static_cast<int>(t));
  }
  for (int c = 0; c < num_classes; ++c) {
    require(!by_class[static_cast<std::size_t>(c)].empty(),
            "train_base: class " + std::to_string(c) + " absent from training data");
  }

  const auto N = static_cast<std::size_t>(e.coding.N());
  const auto S = static_cast<std::size_t>(cfg.S);
  e.models.assign(N, std::vector<BinarySvmModel>(S));
  parallel_for(
      N * S,
      [&](std::size_t task) {
        const std::size_t n = task / S, s = task % S;
        const auto& [ca, cb] = e.coding.columns[n];
        std::vector<int> idx;
        std::vector<int> labels;
        for (int t : by_class[static_cast<std::size_t>(ca)]) {
          idx.push_back(t);
          labels.push_back(1);
        }
        for (int t : by_class[static_cast<std::size_t>(cb)]) {
          idx.push_back(t);
          labels.push_back(-1);
        }
        auto gram = make_gram(idx.size(), [&](std::size_t i, std::size_t j) {
          return komega_cached(e.store[static_cast<std::size_t>(idx[i])],
                               e.store[static_cast<std::size_t>(idx[j])], s, cfg.theta);
        });
        SvmTrainOptions opt;
        opt.C = cfg.C;
        opt.tol = cfg.svm_tol;
        DualSolution sol = smo_train(*gram, labels, opt);
        e.models[n][s] = make_model(sol, labels, idx,
                                    KernelParams{KernelKind::omega, cfg.theta}, cfg.C);
      },
      threads);
  return e;
}

std::vector<double> base_scores(const SubbandEnsemble& e, const SubbandInstance& x, int n) {
  require(n >= 0 && n < e.coding.N(), "base_scores: problem id out of range");
  const auto S = static_cast<std::size_t>(e.cfg.S);
  std::vector<double> f(S);
  for (std::size_t s = 0; s < S; ++s) {
    const auto& m = e.models[static_cast<std::size_t>(n)][s];
    require(!(m.support.empty() && m.b == 0.0),
            "base_scores: untrained model for problem " + std::to_string(n));
    double acc = 0;
    for (std::size_t j = 0; j < m.support.size(); ++j)
      acc += m.alpha_y[j] *
             komega_cached(x, e.store[static_cast<std::size_t>(m.support[j])], s, e.cfg.theta);
    f[s] = acc + m.b;
  }
  return f;
}

Matrix all_base_scores(const SubbandEnsemble& e, const SubbandInstance& x) {
  const auto S = static_cast<std::size_t>(e.cfg.S);
  const auto N = static_cast<std::size_t>(e.coding.N());
  // Kernel values against the whole store are shared by every problem.
  Matrix kv(e.store.size(), S);
  for (std::size_t t = 0; t < e.store.size(); ++t)
    for (std::size_t s = 0; s < S; ++s) kv.at(t, s) = komega_cached(x, e.store[t], s, e.cfg.theta);
  Matrix scores(N, S);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t s = 0; s < S; ++s) {
      const auto& m = e.models[n][s];
      double acc = 0;
      for (std::size_t j = 0; j < m.support.size(); ++j)
        acc += m.alpha_y[j] * kv.at(static_cast<std::size_t>(m.support[j]), s);
      scores.at(n, s) = acc + m.b;
    }
  }
  return scores;
}

int majority_vote(std::span<const double> f) {
  int h = 0;
  for (double v : f) {
    require(std::isfinite(v), "majority_vote: non-finite score");
    h += v >= 0 ? 1 : -1;  // sign(0) = +1
  }
  return h;
}

EnsembleError ensemble_error_analytic(double p, int S) {
  require(p >= 0.0 && p <= 1.0, "ensemble_error_analytic: p must be in [0, 1]");
  require(S >= 1, "ensemble_error_analytic: S must be >= 1");
  // Pascal's triangle keeps the binomials exact up to the double mantissa.
  std::vector<double> binom(static_cast<std::size_t>(S) + 1, 0.0);
  binom[0] = 1.0;
  for (int row = 1; row <= S; ++row)
    for (int k = row; k >= 1; --k) binom[static_cast<std::size_t>(k)] += binom[static_cast<std::size_t>(k - 1)];
  const int s_min = (S + 1) / 2;  // ceil(S/2)
  double exact = 0.0;
  for (int s = s_min; s <= S; ++s)
    exact += binom[static_cast<std::size_t>(s)] * std::pow(p, s) * std::pow(1.0 - p, S - s);
  double bound = 0.5 * std::pow(4.0 * p * (1.0 - p), 0.5 * S);
  return {exact, bound};
}

MetaScenario meta_scenario_from_name(std::string_view name) {
  if (name == "clean") return MetaScenario::clean;
  if (name == "multistyle_anechoic") return MetaScenario::multistyle_anechoic;
  if (name == "multistyle_reverb_matched") return MetaScenario::multistyle_reverb_matched;
  if (name == "multistyle_reverb_mismatched") return MetaScenario::multistyle_reverb_mismatched;
  if (name == "matched") return MetaScenario::matched;
  throw std::invalid_argument("unknown meta scenario: " + std::string(name));
}

std::string_view meta_scenario_name(MetaScenario s) {
  switch (s) {
    case MetaScenario::clean: return "clean";
    case MetaScenario::multistyle_anechoic: return "multistyle_anechoic";
    case MetaScenario::multistyle_reverb_matched: return "multistyle_reverb_matched";
    case MetaScenario::multistyle_reverb_mismatched: return "multistyle_reverb_mismatched";
    case MetaScenario::matched: return "matched";
  }
  return "?";
}

namespace {

// The waveform copies of one dev utterance that feed meta-level training.
std::vector<std::vector<double>> meta_copies(const Utterance& u, const ScenarioSpec& scenario,
                                             std::uint64_t seed) {
  auto mixed = [&]() {
    NoiseSpec ns;
    ns.kind = NoiseKind::white;
    ns.seed = derive_seed(seed, "meta/" + u.id);
    return mix_at_snr(u.samples, ns, 0.0);
  };
  switch (scenario.kind) {
    case MetaScenario::clean:
      return {u.samples};
    case MetaScenario::multistyle_anechoic:
      return {u.samples, mixed()};
    case MetaScenario::multistyle_reverb_matched:
    case MetaScenario::multistyle_reverb_mismatched: {
      require(!scenario.rir_taps.empty(), "train_stacked: reverberant scenario without RIR");
      Rir r{scenario.rir_taps, scenario.rir_name};
      return {convolve_rir(u.samples, r), convolve_rir(mixed(), r)};
    }
    case MetaScenario::matched:
      return {corrupt_samples(u.samples, u.id, scenario.matched)};
  }
  return {u.samples};
}

}  // namespace

StackedModels train_stacked(const SubbandEnsemble& e, std::span<const Utterance> dev,
                            const ScenarioSpec& scenario, std::uint64_t seed, int threads) {
  const auto N = static_cast<std::size_t>(e.coding.N());

  // Featurize and score every copy of every dev utterance up front; the
  // N x S score matrices are shared across the N meta problems.
  struct Scored {
    int class_id;
    Matrix scores;  // N x S
  };
  std::vector<std::vector<Scored>> per_utt(dev.size());
  parallel_for(
      dev.size(),
      [&](std::size_t ui) {
        const Utterance& u = dev[ui];
        for (auto& copy : meta_copies(u, scenario, seed)) {
          Utterance v;
          v.id = u.id;
          v.sample_rate = u.sample_rate;
          v.phones = u.phones;
          v.samples = std::move(copy);
          for (auto& inst : extract_subband_instances(v, e.bank, e.cfg))
            per_utt[ui].push_back(Scored{inst.class_id, all_base_scores(e, inst)});
        }
      },
      threads);

  std::vector<std::vector<const Scored*>> by_class;
  for (const auto& utt : per_utt)
    for (const auto& s : utt) {
      if (static_cast<std::size_t>(s.class_id) >= by_class.size())
        by_class.resize(static_cast<std::size_t>(s.class_id) + 1);
      by_class[static_cast<std::size_t>(s.class_id)].push_back(&s);
    }
  by_class.resize(static_cast<std::size_t>(e.coding.M));

  StackedModels meta;
  meta.weights.assign(N, LinearSvmModel{});
  meta.trained.assign(N, 0);
  parallel_for(
      N,
      [&](std::size_t n) {
        const auto& [ca, cb] = e.coding.columns[n];
        std::vector<std::vector<double>> pts;
        std::vector<int> labels;
        for (const Scored* s : by_class[static_cast<std::size_t>(ca)]) {
          pts.emplace_back(s->scores.row(n).begin(), s->scores.row(n).end());
          labels.push_back(1);
        }
        for (const Scored* s : by_class[static_cast<std::size_t>(cb)]) {
          pts.emplace_back(s->scores.row(n).begin(), s->scores.row(n).end());
          labels.push_back(-1);
        }
        bool have_both = std::count(labels.begin(), labels.end(), 1) >= 1 &&
                         std::count(labels.begin(), labels.end(), -1) >= 1;
        if (!have_both) return;  // data-starved problem keeps majority voting
        meta.weights[n] = train_linear(pts, labels, e.cfg.C, e.cfg.svm_tol);
        meta.trained[n] = 1;
      },
      threads);
  meta.n_fallback =
      static_cast<int>(N) - static_cast<int>(std::count(meta.trained.begin(), meta.trained.end(), 1));
  return meta;
}

std::vector<double> subband_problem_scores(const SubbandEnsemble& e, const StackedModels* meta,
                                           const SubbandInstance& x) {
  Matrix f = all_base_scores(e, x);
  std::vector<double> out(f.rows);
  for (std::size_t n = 0; n < f.rows; ++n) {
    if (meta && meta->trained[n])
      out[n] = linear_score(meta->weights[n], f.row(n));
    else
      out[n] = static_cast<double>(majority_vote(f.row(n)));
  }
  return out;
}

Matrix weight_report(const StackedModels& meta, int S) {
  const auto Ss = static_cast<std::size_t>(S);
  Matrix rep(Ss, 2);
  std::size_t n_trained = 0;
  for (std::size_t n = 0; n < meta.weights.size(); ++n)
    if (meta.trained[n]) ++n_trained;
  require(n_trained > 0, "weight_report: no trained meta models");
  for (std::size_t s = 0; s < Ss; ++s) {
    double mean = 0;
    for (std::size_t n = 0; n < meta.weights.size(); ++n)
      if (meta.trained[n]) mean += meta.weights[n].w[s];
    mean /= static_cast<double>(n_trained);
    double var = 0;
    for (std::size_t n = 0; n < meta.weights.size(); ++n)
      if (meta.trained[n]) {
        double d = meta.weights[n].w[s] - mean;
        var += d * d;
      }
    var /= static_cast<double>(n_trained);  // population convention
    rep.at(s, 0) = mean;
    rep.at(s, 1) = std::sqrt(var);
  }
  return rep;
}

}  // namespace sbsvm
