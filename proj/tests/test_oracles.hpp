// Test-only reference implementations, kept independent of the library paths
// they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sbsvm/util.hpp"

namespace sbsvm::testing {

// Smallest eigenvalue of a symmetric matrix via cyclic Jacobi rotations.
inline double min_eigenvalue_sym(Matrix a) {
  const std::size_t n = a.rows;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-22 * static_cast<double>(n * n)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = 0.5 * (a.at(q, q) - a.at(p, p)) / apq;
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double mn = a.at(0, 0);
  for (std::size_t i = 1; i < n; ++i) mn = std::min(mn, a.at(i, i));
  return mn;
}

// Brute-force solver for the SVM dual
//   max  sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
//   s.t. 0 <= alpha <= C,  sum y_i alpha_i = 0
// by projected gradient ascent with exact projection onto the feasible set
// (bisection on the equality multiplier).
struct QpOracleResult {
  std::vector<double> alpha;
  double objective;
};

inline QpOracleResult qp_oracle(const Matrix& k, std::span<const int> y, double c_box,
                                int iters = 200000) {
  const std::size_t n = k.rows;
  auto project = [&](std::vector<double> v) {
    // alpha(nu) = clip(v - nu*y); find nu with sum y_i alpha_i(nu) = 0.
    auto balance = [&](double nu) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i)
        s += y[i] * std::clamp(v[i] - nu * y[i], 0.0, c_box);
      return s;
    };
    double lo = -1, hi = 1;
    while (balance(lo) < 0) lo *= 2;
    while (balance(hi) > 0) hi *= 2;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (balance(mid) > 0 ? lo : hi) = mid;
    }
    double nu = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i] - nu * y[i], 0.0, c_box);
    return v;
  };

  // Lipschitz constant of the gradient = largest row sum bound of Q.
  double lip = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(k.at(i, j));
    lip = std::max(lip, row);
  }
  double step = 1.0 / std::max(lip, 1e-12);

  std::vector<double> alpha(n, 0.0);
  alpha = project(alpha);
  for (int it = 0; it < iters; ++it) {
    std::vector<double> grad(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      double qa = 0;
      for (std::size_t j = 0; j < n; ++j) qa += y[i] * y[j] * k.at(i, j) * alpha[j];
      grad[i] -= qa;
    }
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = alpha[i] + step * grad[i];
    next = project(std::move(next));
    double delta = 0;
    for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - alpha[i]));
    alpha = std::move(next);
    if (delta < 1e-14) break;
  }
  double obj = 0;
  for (std::size_t i = 0; i < n; ++i) {
    obj += alpha[i];
    for (std::size_t j = 0; j < n; ++j)
      obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * k.at(i, j);
  }
  return {alpha, obj};
}

}  // namespace sbsvm::testing
