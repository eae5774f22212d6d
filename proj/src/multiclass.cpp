#include "sbsvm/multiclass.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sbsvm/util.hpp"

namespace sbsvm {

CodingMatrix build_pairwise(int M) {
  require(M >= 2, "build_pairwise: need M >= 2");
  CodingMatrix c;
  c.M = M;
  c.columns.reserve(static_cast<std::size_t>(M) * (M - 1) / 2);
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) c.columns.emplace_back(i, j);
  return c;
}

DecodeLoss decode_loss_from_name(std::string_view name) {
  if (name == "hinge") return DecodeLoss::hinge;
  if (name == "hamming") return DecodeLoss::hamming;
  if (name == "exp" || name == "exponential") return DecodeLoss::exponential;
  if (name == "linear") return DecodeLoss::linear;
  throw std::invalid_argument("unknown decode loss: " + std::string(name));
}

std::string_view decode_loss_name(DecodeLoss loss) {
  switch (loss) {
    case DecodeLoss::hinge: return "hinge";
    case DecodeLoss::hamming: return "hamming";
    case DecodeLoss::exponential: return "exp";
    case DecodeLoss::linear: return "linear";
  }
  return "?";
}

double decode_loss_value(DecodeLoss loss, double z) {
  switch (loss) {
    case DecodeLoss::hinge: return std::max(1.0 - z, 0.0);
    case DecodeLoss::hamming: return z >= 0 ? 0.0 : 1.0;  // (1 - sgn(z))/2, sgn(0) = +1
    case DecodeLoss::exponential: return std::exp(-z);
    case DecodeLoss::linear: return -z;
  }
  return 0.0;
}

int ecoc_decode(std::span<const double> scores, const CodingMatrix& coding, DecodeLoss loss) {
  require(static_cast<int>(scores.size()) == coding.N(),
          "ecoc_decode: score count does not match coding matrix");
  std::vector<double> total(static_cast<std::size_t>(coding.M), 0.0);
  for (int n = 0; n < coding.N(); ++n) {
    double f = scores[static_cast<std::size_t>(n)];
    require(!std::isnan(f), "ecoc_decode: NaN score at column " + std::to_string(n));
    const auto& [i, j] = coding.columns[static_cast<std::size_t>(n)];
    total[static_cast<std::size_t>(i)] += decode_loss_value(loss, f);
    total[static_cast<std::size_t>(j)] += decode_loss_value(loss, -f);
  }
  int best = 0;
  for (int m = 1; m < coding.M; ++m)
    if (total[static_cast<std::size_t>(m)] < total[static_cast<std::size_t>(best)]) best = m;
  return best;
}

}  // namespace sbsvm
