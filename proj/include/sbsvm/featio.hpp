#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sbsvm {

// One dumped feature instance.
struct FeatureRecord {
  std::string id;
  int class_id = -1;
  std::vector<float> payload;
};

// Binary layout per record, little-endian:
//   u32 id_length, id bytes, i32 class_id, u32 dim, dim * f32 payload.
// The sidecar index (<file>.idx) is plain text, one record per line:
//   <byte offset> <id> <class_id> <dim>
void write_feature_file(const std::filesystem::path& path,
                        const std::vector<FeatureRecord>& records);
std::vector<FeatureRecord> read_feature_file(const std::filesystem::path& path);

}  // namespace sbsvm
