#include "sbsvm/mfcc_frontend.hpp"

#include <algorithm>

#include "sbsvm/kernels.hpp"
#include "sbsvm/simd.hpp"

namespace sbsvm {

MfccScenarioKind mfcc_scenario_from_name(std::string_view name) {
  if (name == "anechoic_vts") return MfccScenarioKind::anechoic_vts;
  if (name == "reverb_matched_vts") return MfccScenarioKind::reverb_matched_vts;
  if (name == "reverb_mismatched_vts") return MfccScenarioKind::reverb_mismatched_vts;
  if (name == "matched") return MfccScenarioKind::matched;
  throw std::invalid_argument("unknown mfcc scenario: " + std::string(name));
}

std::string_view mfcc_scenario_name(MfccScenarioKind k) {
  switch (k) {
    case MfccScenarioKind::anechoic_vts: return "anechoic_vts";
    case MfccScenarioKind::reverb_matched_vts: return "reverb_matched_vts";
    case MfccScenarioKind::reverb_mismatched_vts: return "reverb_mismatched_vts";
    case MfccScenarioKind::matched: return "matched";
  }
  return "?";
}

namespace {

// Training-side corruption dictated by the scenario.
std::vector<double> scenario_train_samples(const Utterance& u, const MfccScenario& sc) {
  switch (sc.kind) {
    case MfccScenarioKind::anechoic_vts:
      return u.samples;
    case MfccScenarioKind::reverb_matched_vts:
    case MfccScenarioKind::reverb_mismatched_vts: {
      require(!sc.train_rir_taps.empty(), "mfcc scenario: reverberant training without RIR");
      Rir r{sc.train_rir_taps, sc.train_rir_name};
      return convolve_rir(u.samples, r);
    }
    case MfccScenarioKind::matched:
      return corrupt_samples(u.samples, u.id, sc.matched);
  }
  return u.samples;
}

// 390-dim instances of one utterance from a prepared log-mel sequence.
std::vector<std::vector<double>> instances_from_log_mel(const Matrix& log_mel,
                                                        const Utterance& u,
                                                        const MfccConfig& cfg) {
  Matrix ceps = mfcc_from_log_mel(log_mel, cfg);
  Matrix full = add_deltas(ceps, cfg.delta_window);
  cmvn(full);
  std::vector<std::vector<double>> out;
  out.reserve(u.phones.size());
  for (const auto& p : u.phones)
    out.push_back(concat_center(full, (p.start + p.end) / 2, cfg));
  return out;
}

}  // namespace

MfccClassifier train_mfcc_classifier(std::span<const Utterance> train_clean, int num_classes,
                                     const MfccScenario& scenario, const MfccFrontendConfig& cfg,
                                     int threads) {
  require(!train_clean.empty(), "train_mfcc_classifier: no training utterances");
  MfccClassifier clf;
  clf.cfg = cfg;
  clf.scenario = scenario;
  clf.coding = build_pairwise(num_classes);

  // Feature extraction under the scenario corruption, parallel per utterance.
  std::vector<std::vector<std::vector<double>>> feats(train_clean.size());
  std::vector<Matrix> clean_logmel(train_clean.size());
  parallel_for(
      train_clean.size(),
      [&](std::size_t ui) {
        const Utterance& u = train_clean[ui];
        auto samples = scenario_train_samples(u, scenario);
        Matrix logmel = log_mel_sequence(samples, cfg.mfcc);
        clean_logmel[ui] = logmel;  // scenario-consistent "clean" for the GMM
        Utterance v;
        v.id = u.id;
        v.sample_rate = u.sample_rate;
        v.phones = u.phones;
        v.samples = std::move(samples);
        feats[ui] = instances_from_log_mel(logmel, v, cfg.mfcc);
      },
      threads);

  for (std::size_t ui = 0; ui < feats.size(); ++ui)
    for (std::size_t pi = 0; pi < feats[ui].size(); ++pi) {
      clf.store.push_back(std::move(feats[ui][pi]));
      clf.store_class.push_back(train_clean[ui].phones[pi].class_id);
    }

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t t = 0; t < clf.store.size(); ++t)
    by_class[static_cast<std::size_t>(clf.store_class[t])].push_back(static_cast<int>(t));
  for (int c = 0; c < num_classes; ++c)
    require(!by_class[static_cast<std::size_t>(c)].empty(),
            "train_mfcc_classifier: class " + std::to_string(c) + " absent from training data");

  // VTS GMM on the scenario-consistent clean log-mel frames.
  if (scenario.use_vts && scenario.kind != MfccScenarioKind::matched) {
    std::size_t total = 0;
    for (const auto& m : clean_logmel) total += m.rows;
    Matrix pool(total, static_cast<std::size_t>(cfg.mfcc.nmel));
    std::size_t r = 0;
    for (const auto& m : clean_logmel)
      for (std::size_t t = 0; t < m.rows; ++t, ++r)
        std::copy(m.row(t).begin(), m.row(t).end(), pool.row(r).begin());
    clf.vts_gmm = gmm_train(pool, cfg.gmm_components, cfg.gmm_seed).model;
    clf.has_gmm = true;
  }

  const auto N = static_cast<std::size_t>(clf.coding.N());
  clf.models.assign(N, BinarySvmModel{});
  parallel_for(
      N,
      [&](std::size_t n) {
        const auto& [ca, cb] = clf.coding.columns[n];
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
          const auto& a = clf.store[static_cast<std::size_t>(idx[i])];
          const auto& b = clf.store[static_cast<std::size_t>(idx[j])];
          return ipow(1.0 + simd::dot(a.data(), b.data(), a.size()), cfg.theta);
        });
        SvmTrainOptions opt;
        opt.C = cfg.C;
        opt.tol = cfg.svm_tol;
        DualSolution sol = smo_train(*gram, labels, opt);
        clf.models[n] =
            make_model(sol, labels, idx, KernelParams{KernelKind::poly, cfg.theta}, cfg.C);
      },
      threads);
  return clf;
}

std::vector<std::vector<double>> mfcc_instance_features(const Utterance& u,
                                                        const MfccClassifier& clf) {
  Matrix logmel = log_mel_sequence(u.samples, clf.cfg.mfcc);
  if (clf.has_gmm) {
    auto noise_mean = edge_noise_mean(logmel);
    logmel = vts_compensate(logmel, clf.vts_gmm, noise_mean);
  }
  return instances_from_log_mel(logmel, u, clf.cfg.mfcc);
}

std::vector<double> mfcc_problem_scores(const MfccClassifier& clf,
                                        std::span<const double> feature) {
  // Kernel evaluations against the store are shared across problems.
  std::vector<double> kv(clf.store.size());
  for (std::size_t t = 0; t < clf.store.size(); ++t)
    kv[t] = ipow(1.0 + simd::dot(feature.data(), clf.store[t].data(), feature.size()),
                 clf.cfg.theta);
  std::vector<double> out(static_cast<std::size_t>(clf.coding.N()));
  for (std::size_t n = 0; n < out.size(); ++n) {
    const auto& m = clf.models[n];
    double acc = 0;
    for (std::size_t j = 0; j < m.support.size(); ++j)
      acc += m.alpha_y[j] * kv[static_cast<std::size_t>(m.support[j])];
    out[n] = acc + m.b;
  }
  return out;
}

std::vector<int> classify_mfcc(const MfccClassifier& clf, const Utterance& corrupted) {
  auto feats = mfcc_instance_features(corrupted, clf);
  std::vector<int> preds;
  preds.reserve(feats.size());
  for (const auto& f : feats)
    preds.push_back(ecoc_decode(mfcc_problem_scores(clf, f), clf.coding, DecodeLoss::hinge));
  return preds;
}

}  // namespace sbsvm
