#pragma once

#include <span>
#include <vector>

namespace sbsvm {

struct FusionParams {
  enum class Mode { fixed, empirical } mode = Mode::empirical;
  double fixed_lambda = 0.5;
  // Empirical schedule constants.
  double eta = 0.2;
  double zeta = 0.5;
  double sigma0_sq = 0.03;
  enum class SigmaSource { estimated, known } sigma_source = SigmaSource::estimated;
  double known_sigma_sq = 0.0;
  bool normalize_scores = true;  // divide per-problem scores by dev median |score|
};

// lambda_emp(sigma^2) = eta + zeta / (1 + sigma0^2/sigma^2), in [eta, eta+zeta].
double lambda_emp(double sigma_sq, const FusionParams& p = {});

// Per-problem convex combination (1-lambda) f_mfcc + lambda f_subband.
std::vector<double> fuse_scores(std::span<const double> f_mfcc,
                                std::span<const double> f_subband, double lambda);

// Per-problem scale equalization: divisors are the median |score| over a dev
// collection (identity when scores are empty or the median is 0).
struct ScoreNormalizer {
  std::vector<double> divisors;  // one per binary problem; empty = identity
  std::vector<double> apply(std::span<const double> scores) const;
};

ScoreNormalizer make_score_normalizer(const std::vector<std::vector<double>>& dev_scores);

}  // namespace sbsvm
