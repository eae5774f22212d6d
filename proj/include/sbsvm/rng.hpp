#pragma once

#include <cstdint>
#include <string_view>

namespace sbsvm {

// xoshiro256++ with explicit distributions. std::mt19937 plus the standard
// <random> distributions are implementation-defined, which would break the
// byte-identical reproducibility contract; everything here is pinned.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                          // [0, 1)
  double uniform(double lo, double hi);      // [lo, hi)
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // [lo, hi] inclusive
  double normal();                           // standard normal, Box-Muller

 private:
  std::uint64_t s_[4];
};

// Stream-splitting: a stable sub-seed for (master, tag). Tags are short
// strings like "noise/utt17/snr0".
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

}  // namespace sbsvm
