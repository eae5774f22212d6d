#include "sbsvm/model_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>

namespace sbsvm {

namespace {

using nlohmann::json;

constexpr char kMagic[] = "SBMP1\n";

struct Writer {
  std::ofstream f;
  explicit Writer(const std::filesystem::path& p) : f(p, std::ios::binary) {
    require(static_cast<bool>(f), "model pack: cannot write " + p.string());
    f.write(kMagic, 6);
  }
  void header(const json& j) {
    std::string s = j.dump();
    u32(static_cast<std::uint32_t>(s.size()));
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void u32(std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
  void i32(std::int32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
  void u8(std::uint8_t v) { f.write(reinterpret_cast<const char*>(&v), 1); }
  void f64s(const double* p, std::size_t n) {
    f.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
  }
  void i32s(const int* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) i32(p[i]);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
};

struct Reader {
  std::ifstream f;
  explicit Reader(const std::filesystem::path& p) : f(p, std::ios::binary) {
    require(static_cast<bool>(f), "model pack: cannot open " + p.string());
    char magic[6];
    f.read(magic, 6);
    require(f.gcount() == 6 && std::string_view(magic, 6) == kMagic,
            "model pack: bad magic in " + p.string());
  }
  json header() {
    auto n = u32();
    std::string s(n, '\0');
    f.read(s.data(), n);
    check();
    return json::parse(s);
  }
  void check() { require(static_cast<bool>(f), "model pack: truncated file"); }
  std::uint32_t u32() {
    std::uint32_t v;
    f.read(reinterpret_cast<char*>(&v), 4);
    check();
    return v;
  }
  std::int32_t i32() {
    std::int32_t v;
    f.read(reinterpret_cast<char*>(&v), 4);
    check();
    return v;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    f.read(reinterpret_cast<char*>(&v), 1);
    check();
    return v;
  }
  void f64s(double* p, std::size_t n) {
    f.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * 8));
    check();
  }
  std::string str() {
    auto n = u32();
    std::string s(n, '\0');
    f.read(s.data(), n);
    check();
    return s;
  }
};

void write_binary_model(Writer& w, const BinarySvmModel& m) {
  w.u32(static_cast<std::uint32_t>(m.support.size()));
  w.i32s(m.support.data(), m.support.size());
  w.f64s(m.alpha_y.data(), m.alpha_y.size());
  w.f64s(&m.b, 1);
}

BinarySvmModel read_binary_model(Reader& r, KernelParams kernel, double C) {
  BinarySvmModel m;
  m.kernel = kernel;
  m.C = C;
  auto n = r.u32();
  m.support.resize(n);
  for (auto& v : m.support) v = r.i32();
  m.alpha_y.resize(n);
  r.f64s(m.alpha_y.data(), n);
  r.f64s(&m.b, 1);
  return m;
}

void write_manifest(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "model pack: cannot write manifest " + path.string());
  f << "sbsvm model pack\n";
  for (auto it = j.begin(); it != j.end(); ++it) f << it.key() << " = " << it.value() << '\n';
}

}  // namespace

void save_subband_ensemble(const std::filesystem::path& path, const SubbandEnsemble& e,
                           const StackedModels* stacked) {
  const auto S = static_cast<std::size_t>(e.cfg.S);
  json h{{"type", "subband"},
         {"M", e.coding.M},
         {"S", e.cfg.S},
         {"T", e.cfg.T},
         {"theta", e.cfg.theta},
         {"C", e.cfg.C},
         {"svm_tol", e.cfg.svm_tol},
         {"waveform_window_ms", e.cfg.waveform_window_ms},
         {"omega_window_ms", e.cfg.omega_window_ms},
         {"standardize_omega", e.cfg.standardize_omega},
         {"inject_noise_subband", e.cfg.inject_noise_subband},
         {"inject_noise_seed", e.cfg.inject_noise_seed},
         {"n_instances", e.store.size()},
         {"comp_len", e.store.empty() ? 0 : e.store[0].components.cols},
         {"omega_dim", e.store.empty() ? 0 : e.store[0].omegas.cols},
         {"stacked", stacked != nullptr}};
  Writer w(path);
  w.header(h);
  for (const auto& inst : e.store) {
    w.str(inst.utt_id);
    w.i32(inst.class_id);
    w.f64s(inst.components.d.data(), inst.components.d.size());
    w.f64s(inst.omegas.d.data(), inst.omegas.d.size());
    w.f64s(inst.norms.data(), inst.norms.size());
  }
  for (const auto& per_problem : e.models)
    for (const auto& m : per_problem) write_binary_model(w, m);
  if (stacked) {
    for (std::size_t n = 0; n < stacked->weights.size(); ++n) {
      w.u8(stacked->trained[n]);
      if (stacked->trained[n]) {
        w.f64s(stacked->weights[n].w.data(), S);
        w.f64s(&stacked->weights[n].v, 1);
      }
    }
  }
  write_manifest(path.string() + ".manifest", h);
}

LoadedSubband load_subband_ensemble(const std::filesystem::path& path) {
  Reader r(path);
  json h = r.header();
  require(h.at("type") == "subband", "model pack: not a subband pack");
  LoadedSubband out;
  SubbandEnsemble& e = out.ensemble;
  e.cfg.S = h.at("S");
  e.cfg.T = h.at("T");
  e.cfg.theta = h.at("theta");
  e.cfg.C = h.at("C");
  e.cfg.svm_tol = h.at("svm_tol");
  e.cfg.waveform_window_ms = h.at("waveform_window_ms");
  e.cfg.omega_window_ms = h.at("omega_window_ms");
  e.cfg.standardize_omega = h.at("standardize_omega");
  e.cfg.inject_noise_subband = h.at("inject_noise_subband");
  e.cfg.inject_noise_seed = h.at("inject_noise_seed");
  e.coding = build_pairwise(h.at("M"));
  e.bank = design_cmfb(e.cfg.S);
  const auto S = static_cast<std::size_t>(e.cfg.S);
  const std::size_t n_inst = h.at("n_instances");
  const std::size_t comp_len = h.at("comp_len");
  const std::size_t omega_dim = h.at("omega_dim");
  e.store.resize(n_inst);
  for (auto& inst : e.store) {
    inst.utt_id = r.str();
    inst.class_id = r.i32();
    inst.components = Matrix(S, comp_len);
    r.f64s(inst.components.d.data(), inst.components.d.size());
    inst.omegas = Matrix(S, omega_dim);
    r.f64s(inst.omegas.d.data(), inst.omegas.d.size());
    inst.norms.resize(S);
    r.f64s(inst.norms.data(), S);
  }
  const auto N = static_cast<std::size_t>(e.coding.N());
  e.models.assign(N, std::vector<BinarySvmModel>(S));
  KernelParams kp{KernelKind::omega, e.cfg.theta};
  for (auto& per_problem : e.models)
    for (auto& m : per_problem) m = read_binary_model(r, kp, e.cfg.C);
  if (h.at("stacked").get<bool>()) {
    StackedModels meta;
    meta.weights.assign(N, LinearSvmModel{});
    meta.trained.assign(N, 0);
    for (std::size_t n = 0; n < N; ++n) {
      meta.trained[n] = static_cast<char>(r.u8());
      if (meta.trained[n]) {
        meta.weights[n].w.resize(S);
        r.f64s(meta.weights[n].w.data(), S);
        r.f64s(&meta.weights[n].v, 1);
      } else {
        ++meta.n_fallback;
      }
    }
    out.stacked = std::move(meta);
  }
  return out;
}

void save_mfcc_classifier(const std::filesystem::path& path, const MfccClassifier& clf) {
  json h{{"type", "mfcc"},
         {"M", clf.coding.M},
         {"theta", clf.cfg.theta},
         {"C", clf.cfg.C},
         {"svm_tol", clf.cfg.svm_tol},
         {"dim", clf.store.empty() ? 0 : clf.store[0].size()},
         {"n_instances", clf.store.size()},
         {"scenario", std::string(mfcc_scenario_name(clf.scenario.kind))},
         {"use_vts", clf.scenario.use_vts},
         {"gmm_components", clf.cfg.gmm_components},
         {"gmm_seed", clf.cfg.gmm_seed},
         {"has_gmm", clf.has_gmm},
         {"nmel", clf.cfg.mfcc.nmel}};
  Writer w(path);
  w.header(h);
  for (std::size_t t = 0; t < clf.store.size(); ++t) {
    w.i32(clf.store_class[t]);
    w.f64s(clf.store[t].data(), clf.store[t].size());
  }
  for (const auto& m : clf.models) write_binary_model(w, m);
  if (clf.has_gmm) {
    w.i32(clf.vts_gmm.K);
    w.i32(clf.vts_gmm.dim);
    w.f64s(clf.vts_gmm.weights.data(), clf.vts_gmm.weights.size());
    w.f64s(clf.vts_gmm.means.d.data(), clf.vts_gmm.means.d.size());
    w.f64s(clf.vts_gmm.vars.d.data(), clf.vts_gmm.vars.d.size());
  }
  write_manifest(path.string() + ".manifest", h);
}

MfccClassifier load_mfcc_classifier(const std::filesystem::path& path) {
  Reader r(path);
  json h = r.header();
  require(h.at("type") == "mfcc", "model pack: not an mfcc pack");
  MfccClassifier clf;
  clf.cfg.theta = h.at("theta");
  clf.cfg.C = h.at("C");
  clf.cfg.svm_tol = h.at("svm_tol");
  clf.cfg.gmm_components = h.at("gmm_components");
  clf.cfg.gmm_seed = h.at("gmm_seed");
  clf.scenario.kind = mfcc_scenario_from_name(h.at("scenario").get<std::string>());
  clf.scenario.use_vts = h.at("use_vts");
  clf.coding = build_pairwise(h.at("M"));
  const std::size_t n_inst = h.at("n_instances");
  const std::size_t dim = h.at("dim");
  clf.store.resize(n_inst);
  clf.store_class.resize(n_inst);
  for (std::size_t t = 0; t < n_inst; ++t) {
    clf.store_class[t] = r.i32();
    clf.store[t].resize(dim);
    r.f64s(clf.store[t].data(), dim);
  }
  clf.models.resize(static_cast<std::size_t>(clf.coding.N()));
  KernelParams kp{KernelKind::poly, clf.cfg.theta};
  for (auto& m : clf.models) m = read_binary_model(r, kp, clf.cfg.C);
  clf.has_gmm = h.at("has_gmm");
  if (clf.has_gmm) {
    clf.vts_gmm.K = r.i32();
    clf.vts_gmm.dim = r.i32();
    clf.vts_gmm.weights.resize(static_cast<std::size_t>(clf.vts_gmm.K));
    r.f64s(clf.vts_gmm.weights.data(), clf.vts_gmm.weights.size());
    clf.vts_gmm.means = Matrix(static_cast<std::size_t>(clf.vts_gmm.K),
                               static_cast<std::size_t>(clf.vts_gmm.dim));
    r.f64s(clf.vts_gmm.means.d.data(), clf.vts_gmm.means.d.size());
    clf.vts_gmm.vars = Matrix(static_cast<std::size_t>(clf.vts_gmm.K),
                              static_cast<std::size_t>(clf.vts_gmm.dim));
    r.f64s(clf.vts_gmm.vars.d.data(), clf.vts_gmm.vars.d.size());
  }
  return clf;
}

}  // namespace sbsvm
