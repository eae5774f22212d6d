#include "sbsvm/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sbsvm {

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
}
std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail(path, "not a RIFF/WAVE file");

  WavData out;
  int channels = 0, bits = 0;
  std::size_t pos = 12;
  bool have_fmt = false, have_data = false;
  while (pos + 8 <= bytes.size()) {
    std::uint32_t size = get_u32(bytes.data() + pos + 4);
    const unsigned char* body = bytes.data() + pos + 8;
    if (pos + 8 + size > bytes.size()) fail(path, "truncated chunk");
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) fail(path, "short fmt chunk");
      std::uint16_t fmt = get_u16(body);
      channels = get_u16(body + 2);
      out.sample_rate = static_cast<int>(get_u32(body + 4));
      bits = get_u16(body + 14);
      if (fmt != 1) fail(path, "not PCM");
      have_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      if (!have_fmt) fail(path, "data chunk before fmt");
      if (channels != 1) fail(path, "expected mono, got " + std::to_string(channels) + " channels");
      if (bits != 16) fail(path, "expected 16-bit PCM, got " + std::to_string(bits) + "-bit");
      std::size_t n = size / 2;
      out.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::int16_t v = static_cast<std::int16_t>(get_u16(body + 2 * i));
        out.samples[i] = v / 32768.0;
      }
      have_data = true;
    }
    pos += 8 + size + (size & 1);
  }
  if (!have_data) fail(path, "no data chunk");
  return out;
}

void write_wav(const std::filesystem::path& path, const std::vector<double>& samples,
               int sample_rate) {
  std::string body;
  body.reserve(44 + samples.size() * 2);
  body += "RIFF";
  put_u32(body, static_cast<std::uint32_t>(36 + samples.size() * 2));
  body += "WAVEfmt ";
  put_u32(body, 16);
  put_u16(body, 1);   // PCM
  put_u16(body, 1);   // mono
  put_u32(body, static_cast<std::uint32_t>(sample_rate));
  put_u32(body, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(body, 2);   // block align
  put_u16(body, 16);  // bits
  body += "data";
  put_u32(body, static_cast<std::uint32_t>(samples.size() * 2));
  for (double s : samples) {
    double clipped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    auto v = static_cast<std::int16_t>(std::lrint(clipped * 32768.0));
    put_u16(body, static_cast<std::uint16_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace sbsvm
