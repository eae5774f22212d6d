#include "sbsvm/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "sbsvm/model_io.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/simd.hpp"

namespace sbsvm {

namespace {

using nlohmann::json;

constexpr const char* kCodeVersion = "sbsvm 0.1.0";
constexpr const char* kCacheVersion = "1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::uint64_t fnv64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string snr_label(const SnrPoint& p) { return p ? fmt(*p) : "quiet"; }

// ---- config ------------------------------------------------------------

namespace {

std::vector<SnrPoint> parse_snr_grid(const json& j) {
  std::vector<SnrPoint> grid;
  for (const auto& v : j) {
    if (v.is_string()) {
      require(v == "quiet", "config: snr_grid entries must be numbers or \"quiet\"");
      grid.push_back(std::nullopt);
    } else {
      grid.push_back(v.get<double>());
    }
  }
  if (grid.empty()) grid.push_back(std::nullopt);  // quiet-only
  return grid;
}

ExperimentConfig config_from_json(const json& full) {
  // A manifest embeds the resolved config under "config"; accept both.
  const json& j = full.contains("config") ? full.at("config") : full;
  ExperimentConfig c;
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.output_dir = j.value("output_dir", c.output_dir.string());
  c.cache_dir = j.value("cache_dir", std::string{});

  if (j.contains("corpus")) {
    const json& jc = j.at("corpus");
    c.corpus.synthetic = jc.value("synthetic", true);
    c.corpus.dir = jc.value("dir", std::string{});
    if (c.corpus.synthetic) {
      c.corpus.synth.num_classes = jc.value("num_classes", c.corpus.synth.num_classes);
      c.corpus.synth.num_utterances = jc.value("num_utterances", c.corpus.synth.num_utterances);
      c.corpus.synth.min_phones = jc.value("min_phones", c.corpus.synth.min_phones);
      c.corpus.synth.max_phones = jc.value("max_phones", c.corpus.synth.max_phones);
      c.corpus.synth.jitter_scale = jc.value("jitter_scale", c.corpus.synth.jitter_scale);
      c.corpus.synth_seed = jc.value("synth_seed", c.corpus.synth_seed);
    } else {
      c.corpus.audio_dir = jc.value("audio_dir", std::string{});
      c.corpus.alignment_dir = jc.value("alignment_dir", std::string{});
      c.corpus.classmap = jc.value("classmap", std::string{});
      require(!c.corpus.audio_dir.empty() && !c.corpus.alignment_dir.empty() &&
                  !c.corpus.classmap.empty(),
              "config: external corpus needs audio_dir, alignment_dir and classmap");
    }
  }
  if (j.contains("split")) {
    const json& js = j.at("split");
    c.split.train = js.value("train", c.split.train);
    c.split.dev = js.value("dev", c.split.dev);
    c.split.test = js.value("test", c.split.test);
    c.split.dev_subset_fraction = js.value("dev_subset_fraction", c.split.dev_subset_fraction);
    c.split.seed = js.value("seed", c.split.seed);
  }
  require(c.split.train > 0 && c.split.dev > 0 && c.split.test > 0 &&
              c.split.train + c.split.dev + c.split.test <= 1.0 + 1e-9,
          "config: split fractions must be positive and sum to at most 1");
  require(c.split.dev_subset_fraction > 0 && c.split.dev_subset_fraction <= 1,
          "config: dev_subset_fraction must be in (0, 1]");

  if (j.contains("front_ends")) {
    c.front_ends = j.at("front_ends").get<std::vector<std::string>>();
    require(!c.front_ends.empty(), "config: front_ends must not be empty");
    for (const auto& fe : c.front_ends)
      require(fe == "mfcc" || fe == "subband" || fe == "fused",
              "config: unknown front end '" + fe + "'");
  }
  c.mfcc_scenario = mfcc_scenario_from_name(j.value("mfcc_scenario", "anechoic_vts"));
  c.mfcc_vts = j.value("mfcc_vts", c.mfcc_vts);
  c.meta_scenario = meta_scenario_from_name(j.value("meta_scenario", "multistyle_anechoic"));
  c.test_reverb = j.value("test_reverb", c.test_reverb);
  if (j.contains("noise")) {
    c.noise.clear();
    for (const auto& v : j.at("noise")) c.noise.push_back(noise_kind_from_name(v.get<std::string>()));
  }
  c.noise_file = j.value("noise_file", std::string{});
  if (j.contains("snr_grid")) c.snr_grid = parse_snr_grid(j.at("snr_grid"));
  if (j.contains("hyper")) {
    const json& jh = j.at("hyper");
    c.hyper.S = jh.value("S", c.hyper.S);
    c.hyper.theta = jh.value("theta", c.hyper.theta);
    c.hyper.T = jh.value("T", c.hyper.T);
    c.hyper.C = jh.value("C", c.hyper.C);
    c.hyper.svm_tol = jh.value("svm_tol", c.hyper.svm_tol);
    require(c.hyper.S >= 1 && c.hyper.theta >= 1 && c.hyper.T >= 1 && c.hyper.C > 0,
            "config: bad hyperparameters");
  }
  if (j.contains("fusion")) {
    const json& jf = j.at("fusion");
    std::string mode = jf.value("mode", "empirical");
    require(mode == "empirical" || mode == "fixed", "config: fusion mode must be empirical|fixed");
    c.fusion.mode = mode == "fixed" ? FusionParams::Mode::fixed : FusionParams::Mode::empirical;
    c.fusion.fixed_lambda = jf.value("fixed_lambda", c.fusion.fixed_lambda);
    require(c.fusion.fixed_lambda >= 0 && c.fusion.fixed_lambda <= 1,
            "config: fixed_lambda must be in [0, 1]");
    c.fusion.eta = jf.value("eta", c.fusion.eta);
    c.fusion.zeta = jf.value("zeta", c.fusion.zeta);
    c.fusion.sigma0_sq = jf.value("sigma0_sq", c.fusion.sigma0_sq);
    std::string src = jf.value("sigma_source", "estimated");
    require(src == "estimated" || src == "known", "config: sigma_source must be estimated|known");
    c.fusion.sigma_source = src == "known" ? FusionParams::SigmaSource::known
                                           : FusionParams::SigmaSource::estimated;
    c.fusion.normalize_scores = jf.value("normalize", c.fusion.normalize_scores);
  }
  c.decode_loss = decode_loss_from_name(j.value("decode_loss", "hinge"));
  c.inject_noise_subband = j.value("inject_noise_subband", c.inject_noise_subband);
  c.inject_noise_seed = j.value("inject_noise_seed", c.inject_noise_seed);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json jn = json::array();
  for (auto k : c.noise) jn.push_back(std::string(noise_kind_name(k)));
  json jg = json::array();
  for (const auto& p : c.snr_grid) {
    if (p)
      jg.push_back(*p);
    else
      jg.push_back("quiet");
  }
  json jc;
  if (c.corpus.synthetic) {
    jc = json{{"synthetic", true},
              {"dir", c.corpus.dir.string()},
              {"num_classes", c.corpus.synth.num_classes},
              {"num_utterances", c.corpus.synth.num_utterances},
              {"min_phones", c.corpus.synth.min_phones},
              {"max_phones", c.corpus.synth.max_phones},
              {"jitter_scale", c.corpus.synth.jitter_scale},
              {"synth_seed", c.corpus.synth_seed}};
  } else {
    jc = json{{"synthetic", false},
              {"audio_dir", c.corpus.audio_dir.string()},
              {"alignment_dir", c.corpus.alignment_dir.string()},
              {"classmap", c.corpus.classmap.string()}};
  }
  return json{
      {"seed", c.seed},
      {"threads", c.threads},
      {"output_dir", c.output_dir.string()},
      {"cache_dir", c.cache_dir.string()},
      {"corpus", jc},
      {"split",
       {{"train", c.split.train},
        {"dev", c.split.dev},
        {"test", c.split.test},
        {"dev_subset_fraction", c.split.dev_subset_fraction},
        {"seed", c.split.seed}}},
      {"front_ends", c.front_ends},
      {"mfcc_scenario", std::string(mfcc_scenario_name(c.mfcc_scenario))},
      {"mfcc_vts", c.mfcc_vts},
      {"meta_scenario", std::string(meta_scenario_name(c.meta_scenario))},
      {"test_reverb", c.test_reverb},
      {"noise", jn},
      {"noise_file", c.noise_file.string()},
      {"snr_grid", jg},
      {"hyper",
       {{"S", c.hyper.S},
        {"theta", c.hyper.theta},
        {"T", c.hyper.T},
        {"C", c.hyper.C},
        {"svm_tol", c.hyper.svm_tol}}},
      {"fusion",
       {{"mode", c.fusion.mode == FusionParams::Mode::fixed ? "fixed" : "empirical"},
        {"fixed_lambda", c.fusion.fixed_lambda},
        {"eta", c.fusion.eta},
        {"zeta", c.fusion.zeta},
        {"sigma0_sq", c.fusion.sigma0_sq},
        {"sigma_source",
         c.fusion.sigma_source == FusionParams::SigmaSource::known ? "known" : "estimated"},
        {"normalize", c.fusion.normalize_scores}}},
      {"decode_loss", std::string(decode_loss_name(c.decode_loss))},
      {"inject_noise_subband", c.inject_noise_subband},
      {"inject_noise_seed", c.inject_noise_seed}};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "config: cannot open " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  return config_from_json(json::parse(text));
}

std::string ExperimentConfig::to_json_text() const { return config_to_json(*this).dump(2); }

// ---- metric ------------------------------------------------------------

double compute_error(std::span<const int> predictions, std::span<const int> truths,
                     const ClassMap& map) {
  require(predictions.size() == truths.size(), "compute_error: length mismatch");
  require(!predictions.empty(), "compute_error: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (map.same_group(predictions[i], truths[i])) ++correct;
  return 100.0 * (1.0 - static_cast<double>(correct) / static_cast<double>(predictions.size()));
}

// ---- corpus ------------------------------------------------------------

PreparedCorpus prepare_corpus(const ExperimentConfig& cfg, bool regenerate) {
  namespace fs = std::filesystem;
  fs::path audio_dir, align_dir, classmap_path;
  if (cfg.corpus.synthetic) {
    fs::path dir = cfg.corpus.dir.empty() ? cfg.output_dir / "corpus" : cfg.corpus.dir;
    if (regenerate || !fs::exists(dir / "classmap.txt")) {
      auto utts = make_synthetic_corpus(cfg.corpus.synth, cfg.corpus.synth_seed);
      auto map = ClassMap::identity(synthetic_class_names(cfg.corpus.synth.num_classes));
      write_corpus(dir, utts, map);
    }
    audio_dir = align_dir = dir;
    classmap_path = dir / "classmap.txt";
  } else {
    audio_dir = cfg.corpus.audio_dir;
    align_dir = cfg.corpus.alignment_dir;
    classmap_path = cfg.corpus.classmap;
  }
  PreparedCorpus out;
  out.map = ClassMap::load(classmap_path);
  LoadResult loaded = load_corpus(audio_dir, align_dir, out.map);
  if (!loaded.errors.empty()) {
    std::string msg = "corpus load failed for " + std::to_string(loaded.errors.size()) +
                      " file(s):";
    for (const auto& e : loaded.errors) msg += "\n  " + e.file + ": " + e.message;
    throw std::runtime_error(msg);
  }
  require(!loaded.utterances.empty(), "corpus: no utterances found");
  out.utterances = std::move(loaded.utterances);
  for (auto& u : out.utterances) u.samples = normalize_unit_energy(u.samples);
  return out;
}

// ---- workspace ----------------------------------------------------------

namespace {

struct FrontEndModels {
  const MfccClassifier* mfcc = nullptr;
  const SubbandEnsemble* ensemble = nullptr;
  const StackedModels* stacked = nullptr;
  ScoreNormalizer norm_mfcc, norm_subband;
};

class Workspace {
 public:
  explicit Workspace(const ExperimentConfig& cfg)
      : cfg_(cfg), corpus_(prepare_corpus(cfg)) {
    auto [r, rp] = make_reference_rirs();
    rir_R_ = std::move(r);
    rir_Rp_ = std::move(rp);
    split();
    std::filesystem::create_directories(cfg_.resolved_cache_dir());
  }

  const ExperimentConfig& cfg() const { return cfg_; }
  const ClassMap& classmap() const { return corpus_.map; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  int meta_fallback() const { return meta_ ? meta_->n_fallback : 0; }
  const StackedModels* stacked() const { return meta_ ? &*meta_ : nullptr; }
  int S() const { return cfg_.hyper.S; }

  bool wants(const std::string& fe) const {
    return std::find(cfg_.front_ends.begin(), cfg_.front_ends.end(), fe) != cfg_.front_ends.end();
  }
  bool needs_mfcc() const { return wants("mfcc") || wants("fused"); }
  bool needs_subband() const { return wants("subband") || wants("fused"); }

  CorruptionSpec test_corruption(NoiseKind noise, const SnrPoint& snr) const {
    CorruptionSpec cs;
    cs.quiet = !snr.has_value();
    cs.noise = noise;
    cs.noise_file = cfg_.noise_file;
    cs.snr_db = snr.value_or(0.0);
    if (cfg_.test_reverb) {
      cs.rir_taps = rir_R_.taps;
      cs.rir_name = rir_R_.name;
    }
    cs.seed = derive_seed(cfg_.seed, "test|" + std::string(noise_kind_name(noise)) + "|" +
                                         snr_label(snr));
    return cs;
  }

  // Models for a grid point (matched scenarios retrain per corruption).
  FrontEndModels models_for(const CorruptionSpec& test_cs) {
    FrontEndModels m;
    if (needs_subband()) {
      ensure_base();
      ensure_meta(test_cs);
      m.ensemble = &*base_;
      m.stacked = &*meta_;
    }
    if (needs_mfcc()) {
      ensure_mfcc(test_cs);
      m.mfcc = &*mfcc_;
    }
    if (wants("fused") && cfg_.fusion.normalize_scores) ensure_normalizers(m);
    return m;
  }

  struct PointResult {
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> preds;  // fe -> (pred, truth)
    std::map<std::string, Matrix> confusion;                                     // fe -> M x M
  };

  PointResult evaluate(const CorruptionSpec& cs, const FrontEndModels& m) {
    struct PerUtt {
      std::vector<int> truth;
      std::map<std::string, std::vector<int>> pred;
    };
    std::vector<PerUtt> per_utt(test_.size());
    parallel_for(
        test_.size(),
        [&](std::size_t ui) {
          const Utterance& clean = *test_[ui];
          Utterance v;
          v.id = clean.id;
          v.sample_rate = clean.sample_rate;
          v.phones = clean.phones;
          v.samples = corrupt_samples(clean.samples, clean.id, cs);
          PerUtt& out = per_utt[ui];
          for (const auto& p : v.phones) out.truth.push_back(p.class_id);

          std::vector<std::vector<double>> mfcc_scores, sub_scores;
          if (m.mfcc) {
            for (const auto& f : mfcc_instance_features(v, *m.mfcc))
              mfcc_scores.push_back(mfcc_problem_scores(*m.mfcc, f));
          }
          if (m.ensemble) {
            for (const auto& inst : extract_subband_instances(v, m.ensemble->bank,
                                                              m.ensemble->cfg))
              sub_scores.push_back(subband_problem_scores(*m.ensemble, m.stacked, inst));
          }
          const CodingMatrix& coding =
              m.ensemble ? m.ensemble->coding : m.mfcc->coding;
          if (wants("mfcc"))
            for (const auto& s : mfcc_scores)
              out.pred["mfcc"].push_back(ecoc_decode(s, coding, cfg_.decode_loss));
          if (wants("subband"))
            for (const auto& s : sub_scores)
              out.pred["subband"].push_back(ecoc_decode(s, coding, cfg_.decode_loss));
          if (wants("fused")) {
            double sigma_sq;
            if (cfg_.fusion.sigma_source == FusionParams::SigmaSource::known)
              sigma_sq = cs.quiet ? 0.0 : std::pow(10.0, -cs.snr_db / 10.0);
            else
              sigma_sq = estimate_noise_variance(v.samples);
            double lambda = cfg_.fusion.mode == FusionParams::Mode::fixed
                                ? cfg_.fusion.fixed_lambda
                                : lambda_emp(sigma_sq, cfg_.fusion);
            for (std::size_t i = 0; i < mfcc_scores.size(); ++i) {
              auto fm = m.norm_mfcc.apply(mfcc_scores[i]);
              auto fsb = m.norm_subband.apply(sub_scores[i]);
              out.pred["fused"].push_back(
                  ecoc_decode(fuse_scores(fm, fsb, lambda), coding, cfg_.decode_loss));
            }
          }
        },
        cfg_.threads);

    PointResult res;
    const auto M = static_cast<std::size_t>(classmap().num_classes());
    for (const auto& fe : cfg_.front_ends) res.confusion.emplace(fe, Matrix(M, M));
    for (const auto& pu : per_utt) {
      for (const auto& fe : cfg_.front_ends) {
        auto& [preds, truths] = res.preds[fe];
        const auto& p = pu.pred.at(fe);
        preds.insert(preds.end(), p.begin(), p.end());
        truths.insert(truths.end(), pu.truth.begin(), pu.truth.end());
        for (std::size_t i = 0; i < p.size(); ++i)
          res.confusion[fe].at(static_cast<std::size_t>(pu.truth[i]),
                               static_cast<std::size_t>(p[i])) += 1.0;
      }
    }
    return res;
  }

  std::string scenario_label() const {
    std::string s;
    if (needs_subband()) s += std::string(meta_scenario_name(cfg_.meta_scenario));
    if (needs_mfcc()) {
      if (!s.empty()) s += "/";
      s += std::string(mfcc_scenario_name(cfg_.mfcc_scenario));
      if (!cfg_.mfcc_vts) s += "-novts";
    }
    if (cfg_.test_reverb) s += "+reverb";
    return s;
  }

  void warm(const std::string& which, const CorruptionSpec& cs) {
    if ((which == "base" || which == "meta" || which == "all") && needs_subband()) ensure_base();
    if ((which == "meta" || which == "all") && needs_subband()) ensure_meta(cs);
    if ((which == "mfcc" || which == "all") && needs_mfcc()) ensure_mfcc(cs);
  }

 private:
  void split() {
    const std::size_t n = corpus_.utterances.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(cfg_.split.seed);
    for (std::size_t i = n; i > 1; --i) {
      auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(idx[i - 1], idx[j]);
    }
    auto n_train = static_cast<std::size_t>(std::lround(cfg_.split.train * static_cast<double>(n)));
    auto n_dev = static_cast<std::size_t>(std::lround(cfg_.split.dev * static_cast<double>(n)));
    n_train = std::max<std::size_t>(1, std::min(n_train, n - 2));
    n_dev = std::max<std::size_t>(1, std::min(n_dev, n - n_train - 1));
    for (std::size_t i = 0; i < n; ++i) {
      const Utterance* u = &corpus_.utterances[idx[i]];
      if (i < n_train)
        train_.push_back(u);
      else if (i < n_train + n_dev)
        dev_.push_back(u);
      else
        test_.push_back(u);
    }
    auto sub = sample_dev_subset(dev_.size(), cfg_.split.dev_subset_fraction,
                                 derive_seed(cfg_.split.seed, "dev_subset"));
    for (auto i : sub) dev_subset_.push_back(*dev_[i]);
  }

  std::string corpus_tag() const {
    const auto& c = cfg_.corpus;
    if (c.synthetic)
      return "synth|K" + std::to_string(c.synth.num_classes) + "|U" +
             std::to_string(c.synth.num_utterances) + "|j" + fmt(c.synth.jitter_scale) + "|s" +
             std::to_string(c.synth_seed);
    return "ext|" + c.audio_dir.string() + "|" + c.alignment_dir.string();
  }

  std::string split_tag() const {
    return "split|" + fmt(cfg_.split.train) + "|" + fmt(cfg_.split.dev) + "|" +
           fmt(cfg_.split.test) + "|" + fmt(cfg_.split.dev_subset_fraction) + "|" +
           std::to_string(cfg_.split.seed);
  }

  std::string pipeline_tag() const {
    return "S" + std::to_string(cfg_.hyper.S) + "|T" + std::to_string(cfg_.hyper.T) + "|th" +
           std::to_string(cfg_.hyper.theta) + "|C" + fmt(cfg_.hyper.C) + "|tol" +
           fmt(cfg_.hyper.svm_tol) + "|inj" + std::to_string(cfg_.inject_noise_subband) + "." +
           std::to_string(cfg_.inject_noise_seed);
  }

  SubbandPipelineConfig pipeline_cfg() const {
    SubbandPipelineConfig pc;
    pc.S = cfg_.hyper.S;
    pc.T = cfg_.hyper.T;
    pc.theta = cfg_.hyper.theta;
    pc.C = cfg_.hyper.C;
    pc.svm_tol = cfg_.hyper.svm_tol;
    pc.inject_noise_subband = cfg_.inject_noise_subband;
    pc.inject_noise_seed = cfg_.inject_noise_seed;
    return pc;
  }

  std::filesystem::path cache_path(const std::string& kind, const std::string& tag) const {
    return cfg_.resolved_cache_dir() /
           (kind + "_" + hex64(fnv64(std::string(kCacheVersion) + "|" + tag)) + ".pack");
  }

  void ensure_base() {
    if (base_) return;
    std::string tag = "base|" + corpus_tag() + "|" + split_tag() + "|" + pipeline_tag();
    auto path = cache_path("base", tag);
    if (std::filesystem::exists(path)) {
      try {
        base_ = load_subband_ensemble(path).ensemble;
        return;
      } catch (const std::exception& e) {
        warnings_.push_back("cache: recomputing base ensemble (" + std::string(e.what()) + ")");
      }
    }
    std::vector<SubbandInstance> insts;
    CmfbBank bank = design_cmfb(cfg_.hyper.S);
    auto pc = pipeline_cfg();
    std::vector<std::vector<SubbandInstance>> per_utt(train_.size());
    parallel_for(
        train_.size(),
        [&](std::size_t ui) { per_utt[ui] = extract_subband_instances(*train_[ui], bank, pc); },
        cfg_.threads);
    for (auto& v : per_utt)
      for (auto& inst : v) insts.push_back(std::move(inst));
    base_ = train_base(std::move(insts), classmap().num_classes(), pc, cfg_.threads);
    save_subband_ensemble(path, *base_);
  }

  void ensure_meta(const CorruptionSpec& test_cs) {
    ScenarioSpec sc;
    sc.kind = cfg_.meta_scenario;
    if (sc.kind == MetaScenario::multistyle_reverb_matched) {
      sc.rir_taps = rir_R_.taps;
      sc.rir_name = rir_R_.name;
    } else if (sc.kind == MetaScenario::multistyle_reverb_mismatched) {
      sc.rir_taps = rir_Rp_.taps;
      sc.rir_name = rir_Rp_.name;
    } else if (sc.kind == MetaScenario::matched) {
      sc.matched = test_cs;
      sc.matched.seed = derive_seed(cfg_.seed, "meta-matched|" + corruption_tag(test_cs));
    }
    std::string tag = "meta|" + corpus_tag() + "|" + split_tag() + "|" + pipeline_tag() + "|" +
                      std::string(meta_scenario_name(sc.kind)) +
                      (sc.kind == MetaScenario::matched ? "|" + corruption_tag(sc.matched)
                                                        : std::string{}) +
                      "|seed" + std::to_string(cfg_.seed);
    if (meta_ && tag == meta_tag_) return;
    ensure_base();
    auto path = cache_path("meta", tag);
    if (std::filesystem::exists(path)) {
      try {
        auto loaded = load_subband_ensemble(path);
        require(loaded.stacked.has_value(), "meta pack without stacked section");
        meta_ = std::move(*loaded.stacked);
        meta_tag_ = tag;
        return;
      } catch (const std::exception& e) {
        warnings_.push_back("cache: recomputing meta models (" + std::string(e.what()) + ")");
      }
    }
    meta_ = train_stacked(*base_, dev_subset_, sc, derive_seed(cfg_.seed, "meta"), cfg_.threads);
    meta_tag_ = tag;
    save_subband_ensemble(path, *base_, &*meta_);
    if (meta_->n_fallback > 0)
      warnings_.push_back("meta: " + std::to_string(meta_->n_fallback) +
                          " problem(s) fell back to majority voting (dev subset too small)");
  }

  void ensure_mfcc(const CorruptionSpec& test_cs) {
    MfccScenario sc;
    sc.kind = cfg_.mfcc_scenario;
    sc.use_vts = cfg_.mfcc_vts;
    if (sc.kind == MfccScenarioKind::reverb_matched_vts) {
      sc.train_rir_taps = rir_R_.taps;
      sc.train_rir_name = rir_R_.name;
    } else if (sc.kind == MfccScenarioKind::reverb_mismatched_vts) {
      sc.train_rir_taps = rir_Rp_.taps;
      sc.train_rir_name = rir_Rp_.name;
    } else if (sc.kind == MfccScenarioKind::matched) {
      sc.matched = test_cs;
      sc.matched.seed = derive_seed(cfg_.seed, "mfcc-matched|" + corruption_tag(test_cs));
    }
    std::string tag = "mfcc|" + corpus_tag() + "|" + split_tag() + "|th" +
                      std::to_string(cfg_.hyper.theta) + "|C" + fmt(cfg_.hyper.C) + "|" +
                      std::string(mfcc_scenario_name(sc.kind)) + "|vts" +
                      std::to_string(sc.use_vts) +
                      (sc.kind == MfccScenarioKind::matched ? "|" + corruption_tag(sc.matched)
                                                            : std::string{});
    if (mfcc_ && tag == mfcc_tag_) return;
    auto path = cache_path("mfcc", tag);
    if (std::filesystem::exists(path)) {
      try {
        mfcc_ = load_mfcc_classifier(path);
        mfcc_tag_ = tag;
        return;
      } catch (const std::exception& e) {
        warnings_.push_back("cache: recomputing mfcc models (" + std::string(e.what()) + ")");
      }
    }
    MfccFrontendConfig fc;
    fc.theta = cfg_.hyper.theta;
    fc.C = cfg_.hyper.C;
    fc.svm_tol = cfg_.hyper.svm_tol;
    fc.gmm_seed = derive_seed(cfg_.seed, "gmm");
    std::vector<Utterance> train_utts;
    for (const auto* u : train_) train_utts.push_back(*u);
    mfcc_ = train_mfcc_classifier(train_utts, classmap().num_classes(), sc, fc, cfg_.threads);
    mfcc_tag_ = tag;
    save_mfcc_classifier(path, *mfcc_);
  }

  // Median |score| per problem over the clean dev subset instances.
  void ensure_normalizers(FrontEndModels& m) {
    if (!norm_mfcc_.divisors.empty() || !norm_subband_.divisors.empty()) {
      m.norm_mfcc = norm_mfcc_;
      m.norm_subband = norm_subband_;
      return;
    }
    std::vector<std::vector<double>> mfcc_scores, sub_scores;
    for (const auto& u : dev_subset_) {
      if (m.mfcc)
        for (const auto& f : mfcc_instance_features(u, *m.mfcc))
          mfcc_scores.push_back(mfcc_problem_scores(*m.mfcc, f));
      if (m.ensemble)
        for (const auto& inst : extract_subband_instances(u, m.ensemble->bank, m.ensemble->cfg))
          sub_scores.push_back(subband_problem_scores(*m.ensemble, m.stacked, inst));
    }
    norm_mfcc_ = make_score_normalizer(mfcc_scores);
    norm_subband_ = make_score_normalizer(sub_scores);
    m.norm_mfcc = norm_mfcc_;
    m.norm_subband = norm_subband_;
  }

  ExperimentConfig cfg_;
  PreparedCorpus corpus_;
  Rir rir_R_, rir_Rp_;
  std::vector<const Utterance*> train_, dev_, test_;
  std::vector<Utterance> dev_subset_;
  std::optional<SubbandEnsemble> base_;
  std::optional<StackedModels> meta_;
  std::string meta_tag_;
  std::optional<MfccClassifier> mfcc_;
  std::string mfcc_tag_;
  ScoreNormalizer norm_mfcc_, norm_subband_;
  std::vector<std::string> warnings_;
};

void write_confusion(const std::filesystem::path& path, const Matrix& confusion,
                     const ClassMap& map) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write " + path.string());
  f << "truth\\pred";
  for (const auto& n : map.class_names) f << ',' << n;
  f << '\n';
  for (std::size_t r = 0; r < confusion.rows; ++r) {
    f << map.class_names[r];
    for (std::size_t c = 0; c < confusion.cols; ++c)
      f << ',' << static_cast<long>(confusion.at(r, c));
    f << '\n';
  }
}

}  // namespace

void write_results_csv(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write " + path.string());
  f << "front_end,scenario,noise,snr_db,error_pct,n_test,seed\n";
  for (const auto& r : table.rows)
    f << r.front_end << ',' << r.scenario << ',' << r.noise << ',' << r.snr << ','
      << fmt(r.error_pct) << ',' << r.n_test << ',' << r.seed << '\n';
}

std::vector<std::filesystem::path> emit_plot_data(const ResultTable& table,
                                                  const std::filesystem::path& dir) {
  require(!table.rows.empty(), "emit_plot_data: empty table");
  std::filesystem::create_directories(dir);
  // Group rows by (noise, scenario); columns ordered by front-end name.
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::map<std::string, double>>>
      groups;  // (noise, scenario) -> snr -> front_end -> error
  std::vector<std::string> snr_order;
  for (const auto& r : table.rows) {
    groups[{r.noise, r.scenario}][r.snr][r.front_end] = r.error_pct;
    if (std::find(snr_order.begin(), snr_order.end(), r.snr) == snr_order.end())
      snr_order.push_back(r.snr);
  }
  std::vector<std::filesystem::path> files;
  for (const auto& [key, by_snr] : groups) {
    std::set<std::string> fes;
    for (const auto& [snr, m] : by_snr)
      for (const auto& [fe, e] : m) fes.insert(fe);
    std::string scenario_file = key.second;
    std::replace(scenario_file.begin(), scenario_file.end(), '/', '-');
    auto path = dir / ("plot_" + key.first + "_" + scenario_file + ".txt");
    std::ofstream f(path);
    require(static_cast<bool>(f), "cannot write " + path.string());
    f << "# snr_db";
    for (const auto& fe : fes) f << ' ' << fe;
    f << '\n';
    for (const auto& snr : snr_order) {
      auto it = by_snr.find(snr);
      if (it == by_snr.end()) continue;
      f << snr;
      for (const auto& fe : fes) {
        auto jt = it->second.find(fe);
        f << ' ' << (jt == it->second.end() ? "nan" : fmt(jt->second));
      }
      f << '\n';
    }
    files.push_back(path);
  }
  return files;
}

ResultTable read_results_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(f, line)), "empty results file " + path.string());
  require(line == "front_end,scenario,noise,snr_db,error_pct,n_test,seed",
          "unexpected results.csv header in " + path.string());
  ResultTable t;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      auto comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    require(cells.size() == 7, "malformed results row: " + line);
    ResultRow r;
    r.front_end = cells[0];
    r.scenario = cells[1];
    r.noise = cells[2];
    r.snr = cells[3];
    r.error_pct = std::stod(cells[4]);
    r.n_test = std::stoi(cells[5]);
    r.seed = std::stoull(cells[6]);
    t.rows.push_back(std::move(r));
  }
  return t;
}

void train_artifacts(const ExperimentConfig& cfg, const std::string& which) {
  require(which == "base" || which == "mfcc" || which == "meta" || which == "all",
          "train_artifacts: which must be base|mfcc|meta|all");
  Workspace ws(cfg);
  auto cs = ws.test_corruption(cfg.noise.empty() ? NoiseKind::white : cfg.noise.front(),
                               std::nullopt);
  ws.warm(which, cs);
}

ResultTable evaluate_point(const ExperimentConfig& cfg, NoiseKind noise, const SnrPoint& snr) {
  Workspace ws(cfg);
  auto cs = ws.test_corruption(noise, snr);
  auto models = ws.models_for(cs);
  auto res = ws.evaluate(cs, models);
  ResultTable t;
  for (const auto& fe : cfg.front_ends) {
    const auto& [preds, truths] = res.preds.at(fe);
    t.rows.push_back(ResultRow{fe, ws.scenario_label(), std::string(noise_kind_name(noise)),
                               snr_label(snr), compute_error(preds, truths, ws.classmap()),
                               static_cast<int>(preds.size()), cfg.seed});
  }
  return t;
}

SweepOutputs run_sweep(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  Workspace ws(cfg);
  fs::create_directories(cfg.output_dir);

  SweepOutputs out;
  for (auto noise : cfg.noise) {
    for (const auto& snr : cfg.snr_grid) {
      auto cs = ws.test_corruption(noise, snr);
      auto models = ws.models_for(cs);
      auto res = ws.evaluate(cs, models);
      for (const auto& fe : cfg.front_ends) {
        const auto& [preds, truths] = res.preds.at(fe);
        out.table.rows.push_back(
            ResultRow{fe, ws.scenario_label(), std::string(noise_kind_name(noise)),
                      snr_label(snr), compute_error(preds, truths, ws.classmap()),
                      static_cast<int>(preds.size()), cfg.seed});
        write_confusion(cfg.output_dir / ("confusion_" + fe + "_" +
                                          std::string(noise_kind_name(noise)) + "_" +
                                          snr_label(snr) + ".csv"),
                        res.confusion.at(fe), ws.classmap());
      }
    }
  }

  // Deterministic row order: front-end, then noise, then grid order.
  std::stable_sort(out.table.rows.begin(), out.table.rows.end(),
                   [&](const ResultRow& a, const ResultRow& b) {
                     if (a.front_end != b.front_end) return a.front_end < b.front_end;
                     return a.noise < b.noise;
                   });
  out.results_csv = cfg.output_dir / "results.csv";
  write_results_csv(out.table, out.results_csv);
  emit_plot_data(out.table, cfg.output_dir);

  if (ws.stacked()) {
    Matrix rep = weight_report(*ws.stacked(), ws.S());
    std::ofstream f(cfg.output_dir / "weights_subband.csv");
    f << "subband,mean,std\n";
    for (std::size_t s = 0; s < rep.rows; ++s)
      f << s << ',' << fmt(rep.at(s, 0)) << ',' << fmt(rep.at(s, 1)) << '\n';
  }

  out.warnings = ws.warnings();
  nlohmann::json manifest{{"code_version", kCodeVersion},
                          {"cache_version", kCacheVersion},
                          {"simd_backend", std::string(simd::backend_name())},
                          {"config", nlohmann::json::parse(cfg.to_json_text())},
                          {"warnings", out.warnings},
                          {"meta_fallback_problems", ws.meta_fallback()},
                          {"results", "results.csv"}};
  out.manifest_path = cfg.output_dir / "manifest.json";
  std::ofstream mf(out.manifest_path);
  mf << manifest.dump(2) << '\n';
  return out;
}

}  // namespace sbsvm
