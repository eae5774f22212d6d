#pragma once

#include <filesystem>
#include <vector>

namespace sbsvm {

struct WavData {
  std::vector<double> samples;  // 16-bit PCM scaled to [-1, 1)
  int sample_rate = 0;
};

// Mono 16-bit PCM RIFF only; anything else is an error naming the file.
WavData read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const std::vector<double>& samples,
               int sample_rate);

}  // namespace sbsvm
