#pragma once

#include <functional>
#include <list>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "sbsvm/kernels.hpp"
#include "sbsvm/util.hpp"

namespace sbsvm {

// Row access to a kernel Gram matrix. The SMO loop touches two rows per
// iteration, so providers only need fast repeated row reads.
class GramSource {
 public:
  virtual ~GramSource() = default;
  virtual std::size_t size() const = 0;
  // Pointer stays valid until the provider evicts the row.
  virtual const double* row(std::size_t i) = 0;
};

// Full matrix in memory.
class DenseGram final : public GramSource {
 public:
  explicit DenseGram(Matrix m) : m_(std::move(m)) {
    require(m_.rows == m_.cols, "DenseGram: matrix must be square");
  }
  std::size_t size() const override { return m_.rows; }
  const double* row(std::size_t i) override { return m_.row(i).data(); }

 private:
  Matrix m_;
};

// LRU row cache over an entry filler, for Grams above the memory budget.
class CachedGram final : public GramSource {
 public:
  CachedGram(std::size_t n, std::function<void(std::size_t, double*)> fill_row,
             std::size_t budget_bytes);
  std::size_t size() const override { return n_; }
  const double* row(std::size_t i) override;

 private:
  std::size_t n_;
  std::function<void(std::size_t, double*)> fill_;
  std::size_t max_rows_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

// Builds a provider from an entry function: dense when n*n doubles fit the
// budget, an LRU row cache otherwise.
std::unique_ptr<GramSource> make_gram(std::size_t n,
                                      const std::function<double(std::size_t, std::size_t)>& k,
                                      std::size_t budget_bytes = std::size_t(1) << 30);

struct SvmTrainOptions {
  double C = 1.0;
  double tol = 1e-3;  // KKT violation threshold (max-violating-pair gap)
  long max_iter = 50'000'000;
};

struct DualSolution {
  std::vector<double> alpha;
  double b = 0.0;
  double objective = 0.0;  // sum(alpha) - 1/2 a' Q a, the maximized dual
  long iterations = 0;
};

// Soft-margin dual SVM via SMO with maximal-violating-pair selection.
// Labels must be +/-1 with both classes present.
DualSolution smo_train(GramSource& gram, std::span<const int> y, const SvmTrainOptions& opt);

// Kernel-dual model as persisted: support indices refer to the training
// feature store the caller trained from.
struct BinarySvmModel {
  KernelParams kernel;
  double C = 1.0;
  std::vector<int> support;     // store indices, ascending
  std::vector<double> alpha_y;  // alpha_i * y_i per support vector
  double b = 0.0;
};

// Keeps only alpha > 0 entries; index_of maps local training index -> store index.
BinarySvmModel make_model(const DualSolution& sol, std::span<const int> y,
                          std::span<const int> index_of, KernelParams kernel, double C);

// Eq.-(1) score given kernel evaluations against the support vectors,
// k_support[j] = K(x, sv_j).
double svm_score(const BinarySvmModel& model, std::span<const double> k_support);

struct LinearSvmModel {
  std::vector<double> w;
  double v = 0.0;
};

// Linear-kernel dual training with the weight vector materialized as the
// alpha-weighted sum of support points.
LinearSvmModel train_linear(const std::vector<std::vector<double>>& points,
                            std::span<const int> y, double C = 1.0, double tol = 1e-3);

double linear_score(const LinearSvmModel& model, std::span<const double> x);

}  // namespace sbsvm
