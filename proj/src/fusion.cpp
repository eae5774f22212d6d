#include "sbsvm/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "sbsvm/util.hpp"

namespace sbsvm {

double lambda_emp(double sigma_sq, const FusionParams& p) {
  require(sigma_sq >= 0.0, "lambda_emp: sigma^2 must be nonnegative");
  if (sigma_sq == 0.0) return p.eta;
  return p.eta + p.zeta / (1.0 + p.sigma0_sq / sigma_sq);
}

std::vector<double> fuse_scores(std::span<const double> f_mfcc,
                                std::span<const double> f_subband, double lambda) {
  require(f_mfcc.size() == f_subband.size(), "fuse_scores: score vector length mismatch");
  std::vector<double> out(f_mfcc.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = (1.0 - lambda) * f_mfcc[n] + lambda * f_subband[n];
  return out;
}

std::vector<double> ScoreNormalizer::apply(std::span<const double> scores) const {
  std::vector<double> out(scores.begin(), scores.end());
  if (divisors.empty()) return out;
  require(divisors.size() == scores.size(), "ScoreNormalizer: length mismatch");
  for (std::size_t n = 0; n < out.size(); ++n)
    if (divisors[n] > 0) out[n] /= divisors[n];
  return out;
}

ScoreNormalizer make_score_normalizer(const std::vector<std::vector<double>>& dev_scores) {
  ScoreNormalizer norm;
  if (dev_scores.empty()) return norm;
  const std::size_t N = dev_scores.front().size();
  norm.divisors.assign(N, 0.0);
  std::vector<double> mags(dev_scores.size());
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t i = 0; i < dev_scores.size(); ++i) mags[i] = std::abs(dev_scores[i][n]);
    std::sort(mags.begin(), mags.end());
    std::size_t mid = mags.size() / 2;
    double med = mags.size() % 2 == 1 ? mags[mid] : 0.5 * (mags[mid - 1] + mags[mid]);
    norm.divisors[n] = med;
  }
  return norm;
}

}  // namespace sbsvm
