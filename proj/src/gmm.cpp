#include "sbsvm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sbsvm/rng.hpp"

namespace sbsvm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_gauss_diag(std::span<const double> x, std::span<const double> mean,
                      std::span<const double> var) {
  double acc = 0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    double diff = x[d] - mean[d];
    acc += std::log(var[d]) + diff * diff / var[d];
  }
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + acc);
}

double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double softplus(double t) {
  if (t > 30.0) return t;
  if (t < -30.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

}  // namespace

double GmmModel::log_density(std::span<const double> x) const {
  std::vector<double> lg(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    lg[static_cast<std::size_t>(k)] =
        std::log(weights[static_cast<std::size_t>(k)]) +
        log_gauss_diag(x, means.row(static_cast<std::size_t>(k)), vars.row(static_cast<std::size_t>(k)));
  return logsumexp(lg);
}

double GmmModel::posteriors(std::span<const double> x, std::span<double> gamma) const {
  require(gamma.size() == static_cast<std::size_t>(K), "posteriors: bad output size");
  for (int k = 0; k < K; ++k)
    gamma[static_cast<std::size_t>(k)] =
        std::log(weights[static_cast<std::size_t>(k)]) +
        log_gauss_diag(x, means.row(static_cast<std::size_t>(k)), vars.row(static_cast<std::size_t>(k)));
  double lse = logsumexp({gamma.data(), gamma.size()});
  for (auto& g : gamma) g = std::exp(g - lse);
  return lse;
}

GmmTrainResult gmm_train(const Matrix& data, int K, std::uint64_t seed,
                         const GmmTrainOptions& opt) {
  const std::size_t n = data.rows, dim = data.cols;
  require(K >= 1, "gmm_train: K must be >= 1");
  require(n >= static_cast<std::size_t>(10 * K),
          "gmm_train: need at least 10*K vectors (" + std::to_string(10 * K) + "), got " +
              std::to_string(n));

  GmmModel m;
  m.K = K;
  m.dim = static_cast<int>(dim);
  m.weights.assign(static_cast<std::size_t>(K), 1.0 / K);
  m.means = Matrix(static_cast<std::size_t>(K), dim);
  m.vars = Matrix(static_cast<std::size_t>(K), dim);

  // Global variance: k-means tie-break scale and initial spread.
  std::vector<double> gmean(dim, 0.0), gvar(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) gmean[d] += data.at(i, d);
  for (auto& v : gmean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      double t = data.at(i, d) - gmean[d];
      gvar[d] += t * t;
    }
  for (auto& v : gvar) v = std::max(v / static_cast<double>(n), opt.var_floor);

  // Seeded distinct starting points, then Lloyd iterations.
  Rng rng(seed);
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  for (int k = 0; k < K; ++k) {
    auto j = static_cast<std::size_t>(rng.uniform_int(k, static_cast<std::int64_t>(n) - 1));
    std::swap(pick[static_cast<std::size_t>(k)], pick[j]);
  }
  for (int k = 0; k < K; ++k)
    for (std::size_t d = 0; d < dim; ++d)
      m.means.at(static_cast<std::size_t>(k), d) = data.at(pick[static_cast<std::size_t>(k)], d);

  std::vector<int> assign(n, 0);
  for (int it = 0; it < opt.kmeans_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        double dist = 0;
        for (std::size_t d = 0; d < dim; ++d) {
          double t = data.at(i, d) - m.means.at(static_cast<std::size_t>(k), d);
          dist += t * t;
        }
        if (dist < best) {
          best = dist;
          assign[i] = k;
        }
      }
    }
    Matrix sums(static_cast<std::size_t>(K), dim);
    std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[static_cast<std::size_t>(assign[i])];
      for (std::size_t d = 0; d < dim; ++d)
        sums.at(static_cast<std::size_t>(assign[i]), d) += data.at(i, d);
    }
    for (int k = 0; k < K; ++k)
      if (counts[static_cast<std::size_t>(k)] > 0)
        for (std::size_t d = 0; d < dim; ++d)
          m.means.at(static_cast<std::size_t>(k), d) =
              sums.at(static_cast<std::size_t>(k), d) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }

  // Cluster stats seed the EM.
  {
    Matrix sq(static_cast<std::size_t>(K), dim);
    std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
    Matrix sums(static_cast<std::size_t>(K), dim);
    for (std::size_t i = 0; i < n; ++i) {
      auto k = static_cast<std::size_t>(assign[i]);
      ++counts[k];
      for (std::size_t d = 0; d < dim; ++d) {
        sums.at(k, d) += data.at(i, d);
        sq.at(k, d) += data.at(i, d) * data.at(i, d);
      }
    }
    for (int k = 0; k < K; ++k) {
      auto ks = static_cast<std::size_t>(k);
      double c = static_cast<double>(counts[ks]);
      m.weights[ks] = std::max(c, 1.0) / static_cast<double>(n);
      for (std::size_t d = 0; d < dim; ++d) {
        if (counts[ks] > 0) {
          double mu = sums.at(ks, d) / c;
          m.means.at(ks, d) = mu;
          m.vars.at(ks, d) = std::max(sq.at(ks, d) / c - mu * mu, opt.var_floor);
        } else {
          m.vars.at(ks, d) = gvar[d];
        }
      }
    }
    double wsum = 0;
    for (double w : m.weights) wsum += w;
    for (auto& w : m.weights) w /= wsum;
  }

  GmmTrainResult res;
  std::vector<double> gamma(static_cast<std::size_t>(K));
  Matrix s1(static_cast<std::size_t>(K), dim), s2(static_cast<std::size_t>(K), dim);
  std::vector<double> s0(static_cast<std::size_t>(K));
  for (int it = 0; it < opt.max_iter; ++it) {
    std::fill(s0.begin(), s0.end(), 0.0);
    std::fill(s1.d.begin(), s1.d.end(), 0.0);
    std::fill(s2.d.begin(), s2.d.end(), 0.0);
    double ll = 0;
    for (std::size_t i = 0; i < n; ++i) {  // fixed order: deterministic sums
      ll += m.posteriors(data.row(i), gamma);
      for (int k = 0; k < K; ++k) {
        auto ks = static_cast<std::size_t>(k);
        s0[ks] += gamma[ks];
        for (std::size_t d = 0; d < dim; ++d) {
          s1.at(ks, d) += gamma[ks] * data.at(i, d);
          s2.at(ks, d) += gamma[ks] * data.at(i, d) * data.at(i, d);
        }
      }
    }
    res.log_likelihood.push_back(ll);
    if (res.log_likelihood.size() >= 2) {
      double prev = res.log_likelihood[res.log_likelihood.size() - 2];
      if (std::abs(ll - prev) <= opt.rel_tol * std::abs(prev)) break;
    }
    for (int k = 0; k < K; ++k) {
      auto ks = static_cast<std::size_t>(k);
      if (s0[ks] < 1e-10) continue;  // starved component keeps its parameters
      m.weights[ks] = s0[ks] / static_cast<double>(n);
      for (std::size_t d = 0; d < dim; ++d) {
        double mu = s1.at(ks, d) / s0[ks];
        m.means.at(ks, d) = mu;
        m.vars.at(ks, d) = std::max(s2.at(ks, d) / s0[ks] - mu * mu, opt.var_floor);
      }
    }
    double wsum = 0;
    for (double w : m.weights) wsum += w;
    for (auto& w : m.weights) w /= wsum;
  }
  res.model = std::move(m);
  return res;
}

Matrix vts_compensate(const Matrix& noisy_log_mel, const GmmModel& clean_gmm,
                      std::span<const double> noise_mean_log_mel) {
  require(static_cast<int>(noisy_log_mel.cols) == clean_gmm.dim,
          "vts_compensate: dimension mismatch between features and GMM");
  require(noise_mean_log_mel.size() == noisy_log_mel.cols,
          "vts_compensate: noise mean dimension mismatch");
  const int K = clean_gmm.K;
  const std::size_t dim = noisy_log_mel.cols;

  // Per-component additive shift g_k = log(1 + exp(mu_n - mu_x,k)); the noisy
  // model shares the clean variances (first-order expansion, identity slope).
  Matrix shift(static_cast<std::size_t>(K), dim);
  GmmModel noisy = clean_gmm;
  for (int k = 0; k < K; ++k) {
    auto ks = static_cast<std::size_t>(k);
    for (std::size_t d = 0; d < dim; ++d) {
      double g = softplus(noise_mean_log_mel[d] - clean_gmm.means.at(ks, d));
      shift.at(ks, d) = g;
      noisy.means.at(ks, d) += g;
    }
  }

  Matrix out(noisy_log_mel.rows, dim);
  std::vector<double> gamma(static_cast<std::size_t>(K));
  for (std::size_t t = 0; t < noisy_log_mel.rows; ++t) {
    noisy.posteriors(noisy_log_mel.row(t), gamma);
    for (std::size_t d = 0; d < dim; ++d) {
      double corr = 0;
      for (int k = 0; k < K; ++k)
        corr += gamma[static_cast<std::size_t>(k)] * shift.at(static_cast<std::size_t>(k), d);
      out.at(t, d) = noisy_log_mel.at(t, d) - corr;
    }
  }
  return out;
}

std::vector<double> edge_noise_mean(const Matrix& log_mel, int edge) {
  require(log_mel.rows >= 1, "edge_noise_mean: empty sequence");
  auto e = std::min<std::size_t>(static_cast<std::size_t>(edge), log_mel.rows);
  std::vector<double> mean(log_mel.cols, 0.0);
  std::size_t count = 0;
  auto add = [&](std::size_t t) {
    for (std::size_t d = 0; d < log_mel.cols; ++d) mean[d] += log_mel.at(t, d);
    ++count;
  };
  for (std::size_t t = 0; t < e; ++t) add(t);
  for (std::size_t t = log_mel.rows - e; t < log_mel.rows; ++t)
    if (t >= e) add(t);  // avoid double-counting short sentences
  for (auto& v : mean) v /= static_cast<double>(count);
  return mean;
}

}  // namespace sbsvm
