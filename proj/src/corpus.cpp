#include "sbsvm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sbsvm/rng.hpp"
#include "sbsvm/util.hpp"
#include "sbsvm/wav.hpp"

namespace sbsvm {

namespace fs = std::filesystem;

ClassMap ClassMap::load(const fs::path& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "ClassMap: cannot open " + path.string());
  ClassMap m;
  std::unordered_map<std::string, int> class_id;
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string kw;
    if (!(ss >> kw) || kw[0] == '#') continue;
    if (kw == "fold") {
      std::string raw, cls;
      require(static_cast<bool>(ss >> raw >> cls),
              "ClassMap: bad fold line " + std::to_string(lineno));
      auto [it, inserted] = class_id.try_emplace(cls, static_cast<int>(m.class_names.size()));
      if (inserted) m.class_names.push_back(cls);
      m.fold[raw] = it->second;
    } else if (kw == "drop") {
      std::string raw;
      require(static_cast<bool>(ss >> raw), "ClassMap: bad drop line " + std::to_string(lineno));
      m.dropped.insert(raw);
    } else if (kw == "group") {
      std::string name;
      require(static_cast<bool>(ss >> name), "ClassMap: bad group line " + std::to_string(lineno));
      std::vector<std::string> members;
      for (std::string c; ss >> c;) members.push_back(c);
      require(members.size() >= 2, "ClassMap: group '" + name + "' needs >= 2 members");
      groups.emplace_back(name, std::move(members));
    } else {
      throw std::invalid_argument("ClassMap: unknown keyword '" + kw + "' at line " +
                                  std::to_string(lineno));
    }
  }
  // Folding a class name is the identity, so folding is idempotent.
  for (std::size_t i = 0; i < m.class_names.size(); ++i)
    m.fold.try_emplace(m.class_names[i], static_cast<int>(i));
  m.group_of.assign(m.class_names.size(), -1);
  for (const auto& [name, members] : groups) {
    for (const auto& c : members) {
      auto it = class_id.find(c);
      require(it != class_id.end(), "ClassMap: group '" + name + "' names unknown class " + c);
      m.group_of[static_cast<std::size_t>(it->second)] = m.num_groups;
    }
    ++m.num_groups;
  }
  return m;
}

void ClassMap::save(const fs::path& path) const {
  std::ofstream f(path);
  require(static_cast<bool>(f), "ClassMap: cannot write " + path.string());
  std::vector<std::pair<std::string, int>> folds(fold.begin(), fold.end());
  std::sort(folds.begin(), folds.end());
  for (const auto& [raw, cls] : folds)
    f << "fold " << raw << ' ' << class_names[static_cast<std::size_t>(cls)] << '\n';
  for (const auto& d : dropped) f << "drop " << d << '\n';
  for (int g = 0; g < num_groups; ++g) {
    f << "group g" << g;
    for (std::size_t c = 0; c < class_names.size(); ++c)
      if (group_of[c] == g) f << ' ' << class_names[c];
    f << '\n';
  }
}

ClassMap ClassMap::identity(const std::vector<std::string>& names) {
  ClassMap m;
  m.class_names = names;
  for (std::size_t i = 0; i < names.size(); ++i) m.fold[names[i]] = static_cast<int>(i);
  m.group_of.assign(names.size(), -1);
  return m;
}

namespace {

std::optional<std::string> validate_phones(const Utterance& u) {
  for (std::size_t i = 0; i < u.phones.size(); ++i) {
    const auto& p = u.phones[i];
    if (p.start >= p.end)
      return "segment " + std::to_string(i) + " has start >= end";
    if (p.start < 0 || p.end > static_cast<std::int64_t>(u.samples.size()))
      return "segment " + std::to_string(i) + " [" + std::to_string(p.start) + "," +
             std::to_string(p.end) + ") outside utterance of " +
             std::to_string(u.samples.size()) + " samples";
    if (i > 0 && u.phones[i - 1].end > p.start)
      return "segments " + std::to_string(i - 1) + " and " + std::to_string(i) +
             " overlap or are out of order";
  }
  return std::nullopt;
}

}  // namespace

LoadResult load_corpus(const fs::path& audio_dir, const fs::path& alignment_dir,
                       const ClassMap& map) {
  LoadResult result;
  require(fs::is_directory(audio_dir), "load_corpus: not a directory: " + audio_dir.string());
  require(fs::is_directory(alignment_dir),
          "load_corpus: not a directory: " + alignment_dir.string());
  std::vector<fs::path> wavs;
  for (const auto& e : fs::directory_iterator(audio_dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
  std::sort(wavs.begin(), wavs.end());

  for (const auto& wav_path : wavs) {
    std::string id = wav_path.stem().string();
    fs::path phn_path = alignment_dir / (id + ".phn");
    try {
      Utterance u;
      u.id = id;
      WavData w = read_wav(wav_path);
      if (w.sample_rate != 16000)
        throw std::runtime_error("expected 16 kHz, got " + std::to_string(w.sample_rate) + " Hz");
      u.samples = std::move(w.samples);
      u.sample_rate = w.sample_rate;

      std::ifstream phn(phn_path);
      if (!phn) throw std::runtime_error("missing alignment file " + phn_path.string());
      std::string line;
      int lineno = 0;
      while (std::getline(phn, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::int64_t start, end;
        std::string label;
        if (!(ss >> start >> end >> label))
          throw std::runtime_error("bad alignment line " + std::to_string(lineno));
        if (map.dropped.contains(label)) continue;
        auto it = map.fold.find(label);
        if (it == map.fold.end())
          throw std::runtime_error("label '" + label + "' not in class map (line " +
                                   std::to_string(lineno) + ")");
        u.phones.push_back(PhoneSegment{start, end, label, it->second});
      }
      if (auto err = validate_phones(u)) throw std::runtime_error(*err);
      result.utterances.push_back(std::move(u));
    } catch (const std::exception& e) {
      result.errors.push_back(LoadError{wav_path.string(), e.what()});
    }
  }
  return result;
}

std::vector<double> extract_segment(const Utterance& u, const PhoneSegment& p, double window_ms) {
  require(window_ms > 0, "extract_segment: window must be positive");
  auto n = static_cast<std::int64_t>(std::lround(window_ms * u.sample_rate / 1000.0));
  std::int64_t center = (p.start + p.end) / 2;  // floor
  std::int64_t lo = center - n / 2;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  auto len = static_cast<std::int64_t>(u.samples.size());
  for (std::int64_t i = std::max<std::int64_t>(lo, 0); i < std::min(lo + n, len); ++i)
    out[static_cast<std::size_t>(i - lo)] = u.samples[static_cast<std::size_t>(i)];
  return out;
}

std::vector<std::size_t> sample_dev_subset(std::size_t n, double fraction, std::uint64_t seed) {
  require(fraction > 0 && fraction <= 1, "sample_dev_subset: fraction must be in (0, 1]");
  if (n == 0) return {};
  auto count = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  count = std::min(count, n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {  // partial Fisher-Yates
    auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace sbsvm
