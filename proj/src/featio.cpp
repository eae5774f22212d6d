#include "sbsvm/featio.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "sbsvm/util.hpp"

namespace sbsvm {

namespace {

template <typename T>
void put(std::ofstream& f, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  require(static_cast<bool>(f), "feature file: unexpected end of file");
  return v;
}

}  // namespace

void write_feature_file(const std::filesystem::path& path,
                        const std::vector<FeatureRecord>& records) {
  std::ofstream bin(path, std::ios::binary);
  require(static_cast<bool>(bin), "feature file: cannot write " + path.string());
  std::ofstream idx(path.string() + ".idx");
  require(static_cast<bool>(idx), "feature file: cannot write index for " + path.string());
  for (const auto& r : records) {
    idx << bin.tellp() << ' ' << r.id << ' ' << r.class_id << ' ' << r.payload.size() << '\n';
    put<std::uint32_t>(bin, static_cast<std::uint32_t>(r.id.size()));
    bin.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
    put<std::int32_t>(bin, r.class_id);
    put<std::uint32_t>(bin, static_cast<std::uint32_t>(r.payload.size()));
    bin.write(reinterpret_cast<const char*>(r.payload.data()),
              static_cast<std::streamsize>(r.payload.size() * sizeof(float)));
  }
  require(static_cast<bool>(bin) && static_cast<bool>(idx),
          "feature file: write failed for " + path.string());
}

std::vector<FeatureRecord> read_feature_file(const std::filesystem::path& path) {
  std::ifstream bin(path, std::ios::binary);
  require(static_cast<bool>(bin), "feature file: cannot open " + path.string());
  std::vector<FeatureRecord> out;
  while (bin.peek() != std::ifstream::traits_type::eof()) {
    FeatureRecord r;
    auto id_len = get<std::uint32_t>(bin);
    r.id.resize(id_len);
    bin.read(r.id.data(), id_len);
    r.class_id = get<std::int32_t>(bin);
    auto dim = get<std::uint32_t>(bin);
    r.payload.resize(dim);
    bin.read(reinterpret_cast<char*>(r.payload.data()),
             static_cast<std::streamsize>(dim * sizeof(float)));
    require(static_cast<bool>(bin), "feature file: truncated record in " + path.string());
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sbsvm
