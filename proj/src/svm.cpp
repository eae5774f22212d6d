#include "sbsvm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbsvm/simd.hpp"

namespace sbsvm {

CachedGram::CachedGram(std::size_t n, std::function<void(std::size_t, double*)> fill_row,
                       std::size_t budget_bytes)
    : n_(n), fill_(std::move(fill_row)) {
  std::size_t row_bytes = n * sizeof(double);
  max_rows_ = std::max<std::size_t>(2, budget_bytes / std::max<std::size_t>(1, row_bytes));
}

const double* CachedGram::row(std::size_t i) {
  auto it = index_.find(i);
  if (it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second.data();
  }
  if (lru_.size() >= max_rows_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  lru_.emplace_front(i, std::vector<double>(n_));
  fill_(i, lru_.front().second.data());
  index_[i] = lru_.begin();
  return lru_.front().second.data();
}

std::unique_ptr<GramSource> make_gram(std::size_t n,
                                      const std::function<double(std::size_t, std::size_t)>& k,
                                      std::size_t budget_bytes) {
  if (n * n * sizeof(double) <= budget_bytes) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      m.at(i, i) = k(i, i);
      for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = m.at(j, i) = k(i, j);
    }
    return std::make_unique<DenseGram>(std::move(m));
  }
  return std::make_unique<CachedGram>(
      n,
      [k, n](std::size_t i, double* out) {
        for (std::size_t j = 0; j < n; ++j) out[j] = k(i, j);
      },
      budget_bytes);
}

namespace {

void check_row_finite(const double* r, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j)
    if (!std::isfinite(r[j])) throw std::runtime_error("svm: non-finite kernel value");
}

}  // namespace

DualSolution smo_train(GramSource& gram, std::span<const int> y, const SvmTrainOptions& opt) {
  const std::size_t n = gram.size();
  require(n >= 2 && y.size() == n, "smo_train: need >= 2 labeled points");
  bool has_pos = false, has_neg = false;
  for (int lab : y) {
    require(lab == 1 || lab == -1, "smo_train: labels must be +/-1");
    (lab == 1 ? has_pos : has_neg) = true;
  }
  require(has_pos && has_neg, "smo_train: single-class input");
  require(opt.C > 0 && opt.tol > 0, "smo_train: C and tol must be positive");

  const double C = opt.C;
  std::vector<double> alpha(n, 0.0);
  // grad_i = (Q alpha)_i - 1, Q_ij = y_i y_j K_ij; alpha = 0 gives -1.
  std::vector<double> grad(n, -1.0);

  auto in_up = [&](std::size_t a) {
    return (y[a] == 1 && alpha[a] < C) || (y[a] == -1 && alpha[a] > 0);
  };
  auto in_low = [&](std::size_t a) {
    return (y[a] == 1 && alpha[a] > 0) || (y[a] == -1 && alpha[a] < C);
  };

  long iter = 0;
  double m_up = 0, m_low = 0;
  for (; iter < opt.max_iter; ++iter) {
    // Maximal violating pair on -y_a grad_a.
    std::size_t i = n, j = n;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      double v = -y[a] * grad[a];
      if (in_up(a) && v > m_up) {
        m_up = v;
        i = a;
      }
      if (in_low(a) && v < m_low) {
        m_low = v;
        j = a;
      }
    }
    if (i == n || j == n || m_up - m_low <= opt.tol) break;

    const double* ki = gram.row(i);
    check_row_finite(ki, n);
    const double kii = ki[i], kij = ki[j];
    const double* kj = gram.row(j);
    check_row_finite(kj, n);
    ki = gram.row(i);  // may have been evicted by the row(j) fetch
    const double kjj = kj[j];

    // Direction d_i = y_i, d_j = -y_j keeps y'alpha fixed; curvature along it
    // is K_ii + K_jj - 2 K_ij regardless of the labels.
    double quad = kii + kjj - 2.0 * kij;
    if (quad <= 0) quad = 1e-12;
    double t = (m_up - m_low) / quad;

    // Box limits for alpha_i + y_i t and alpha_j - y_j t in [0, C].
    double t_hi = std::min(y[i] == 1 ? C - alpha[i] : alpha[i],
                           y[j] == 1 ? alpha[j] : C - alpha[j]);
    double t_lo = std::max(y[i] == 1 ? -alpha[i] : alpha[i] - C,
                           y[j] == 1 ? alpha[j] - C : -alpha[j]);
    t = std::clamp(t, t_lo, t_hi);
    if (!std::isfinite(t)) throw std::runtime_error("svm: non-finite step");
    if (t == 0.0) break;  // numerically stuck at the box boundary

    alpha[i] += y[i] * t;
    alpha[j] -= y[j] * t;
    alpha[i] = std::clamp(alpha[i], 0.0, C);
    alpha[j] = std::clamp(alpha[j], 0.0, C);
    for (std::size_t a = 0; a < n; ++a) grad[a] += y[a] * t * (ki[a] - kj[a]);
  }

  DualSolution sol;
  sol.alpha = std::move(alpha);
  sol.iterations = iter;

  // Bias from free support vectors, else the midpoint of the KKT interval.
  double bsum = 0;
  int bcount = 0;
  for (std::size_t a = 0; a < n; ++a) {
    if (sol.alpha[a] > 0 && sol.alpha[a] < C) {
      bsum += -y[a] * grad[a];
      ++bcount;
    }
  }
  sol.b = bcount > 0 ? bsum / bcount : 0.5 * (m_up + m_low);

  double obj = 0;
  for (std::size_t a = 0; a < n; ++a) obj += 0.5 * sol.alpha[a] * (1.0 - grad[a]);
  sol.objective = obj;
  return sol;
}

BinarySvmModel make_model(const DualSolution& sol, std::span<const int> y,
                          std::span<const int> index_of, KernelParams kernel, double C) {
  BinarySvmModel m;
  m.kernel = kernel;
  m.C = C;
  m.b = sol.b;
  for (std::size_t a = 0; a < sol.alpha.size(); ++a) {
    if (sol.alpha[a] > 0) {
      m.support.push_back(index_of.empty() ? static_cast<int>(a) : index_of[a]);
      m.alpha_y.push_back(sol.alpha[a] * y[a]);
    }
  }
  return m;
}

double svm_score(const BinarySvmModel& model, std::span<const double> k_support) {
  require(k_support.size() == model.alpha_y.size(), "svm_score: kernel vector length mismatch");
  return simd::dot(model.alpha_y.data(), k_support.data(), k_support.size()) + model.b;
}

LinearSvmModel train_linear(const std::vector<std::vector<double>>& points,
                            std::span<const int> y, double C, double tol) {
  require(!points.empty(), "train_linear: no points");
  const std::size_t n = points.size(), dim = points[0].size();
  for (const auto& p : points) require(p.size() == dim, "train_linear: ragged points");
  auto gram = make_gram(n, [&](std::size_t i, std::size_t j) {
    return simd::dot(points[i].data(), points[j].data(), dim);
  });
  SvmTrainOptions opt;
  opt.C = C;
  opt.tol = tol;
  DualSolution sol = smo_train(*gram, y, opt);

  LinearSvmModel m;
  m.w.assign(dim, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    if (sol.alpha[a] > 0) simd::axpy(sol.alpha[a] * y[a], points[a].data(), m.w.data(), dim);
  }
  m.v = sol.b;
  return m;
}

double linear_score(const LinearSvmModel& model, std::span<const double> x) {
  require(x.size() == model.w.size(), "linear_score: dimension mismatch");
  return simd::dot(model.w.data(), x.data(), x.size()) + model.v;
}

}  // namespace sbsvm
