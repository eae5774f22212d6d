#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbsvm {

// Precondition / input validation failure.
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> d;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), d(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return d[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return d[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {d.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {d.data() + r * cols, cols}; }
};

// Runs fn(i) for i in [0, n). Each index writes only to its own output slot,
// so the result is independent of the thread schedule. threads<=0 means
// hardware concurrency.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace sbsvm
