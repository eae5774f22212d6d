#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sbsvm/util.hpp"

namespace sbsvm {

// Diagonal-covariance Gaussian mixture.
struct GmmModel {
  int K = 0, dim = 0;
  std::vector<double> weights;  // K, simplex
  Matrix means;                 // K x dim
  Matrix vars;                  // K x dim, floored

  double log_density(std::span<const double> x) const;
  // Responsibilities gamma_k(x); returns log density as a byproduct.
  double posteriors(std::span<const double> x, std::span<double> gamma) const;
};

struct GmmTrainOptions {
  int max_iter = 100;
  double rel_tol = 1e-5;   // stop on relative log-likelihood improvement
  double var_floor = 1e-4;
  int kmeans_iter = 10;
};

struct GmmTrainResult {
  GmmModel model;
  std::vector<double> log_likelihood;  // per EM iteration, non-decreasing
};

// EM with seeded k-means initialization. Requires at least 10*K vectors.
GmmTrainResult gmm_train(const Matrix& data, int K, std::uint64_t seed,
                         const GmmTrainOptions& opt = {});

// First-order VTS compensation of noisy log-mel frames under a clean-speech
// GMM: per component the noisy mean is mu_x + softplus(mu_n - mu_x), and the
// MMSE clean estimate subtracts the posterior-weighted shift from y.
Matrix vts_compensate(const Matrix& noisy_log_mel, const GmmModel& clean_gmm,
                      std::span<const double> noise_mean_log_mel);

// Noise log-mel mean from the first and last `edge` frames of the sentence.
std::vector<double> edge_noise_mean(const Matrix& log_mel, int edge = 10);

}  // namespace sbsvm
