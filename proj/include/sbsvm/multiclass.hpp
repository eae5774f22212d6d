#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace sbsvm {

// Pairwise (one-vs-one) ECOC coding matrix. Column n trains classes
// (first, second) with +1 on the lower class index; columns are ordered
// lexicographically over pairs (i < j).
struct CodingMatrix {
  int M = 0;
  std::vector<std::pair<int, int>> columns;  // N = M(M-1)/2

  int N() const { return static_cast<int>(columns.size()); }
  // w_mn in {0, +1, -1}.
  int w(int m, int n) const {
    const auto& [i, j] = columns[static_cast<std::size_t>(n)];
    return m == i ? 1 : (m == j ? -1 : 0);
  }
};

CodingMatrix build_pairwise(int M);

enum class DecodeLoss { hinge, hamming, exponential, linear };

DecodeLoss decode_loss_from_name(std::string_view name);
std::string_view decode_loss_name(DecodeLoss loss);

double decode_loss_value(DecodeLoss loss, double z);

// argmin_m sum_n chi(w_mn f_n), with the chi(0) terms dropped (every row of
// the pairwise scheme has the same count of zeros, so they cancel). Ties go
// to the lowest class index. NaN scores are an error.
int ecoc_decode(std::span<const double> scores, const CodingMatrix& coding, DecodeLoss loss);

}  // namespace sbsvm
