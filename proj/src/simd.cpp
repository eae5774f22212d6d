#include "sbsvm/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace sbsvm::simd {

namespace scalar {

// Four independent accumulators, matching the lane structure of the AVX2
// kernels so that dot(a,a) and sumsq(a) are bitwise identical per backend.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + tail;
}

double sumsq(const double* a, std::size_t n) { return dot(a, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace scalar

namespace {

struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
};

constexpr Ops kScalarOps{scalar::dot, scalar::sumsq, scalar::axpy, scalar::scale};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Ops ops_for(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
  if (b == Backend::avx2) return Ops{avx2::dot, avx2::sumsq, avx2::axpy, avx2::scale};
#endif
  (void)b;
  return kScalarOps;
}

Backend resolve_initial() {
  if (const char* env = std::getenv("SBSVM_SIMD")) {
    std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2") {
      if (!cpu_has_avx2()) throw std::runtime_error("SBSVM_SIMD=avx2 but CPU lacks AVX2/FMA");
      return Backend::avx2;
    }
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

struct State {
  Backend backend;
  Ops ops;
  State() : backend(resolve_initial()), ops(ops_for(backend)) {}
};

State& state() {
  static State s;
  return s;
}

}  // namespace

Backend active_backend() { return state().backend; }

std::string_view backend_name() {
  return state().backend == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) {
  return b == Backend::scalar || cpu_has_avx2();
}

void force_backend(Backend b) {
  if (!backend_available(b)) throw std::runtime_error("requested SIMD backend not available");
  state().backend = b;
  state().ops = ops_for(b);
}

double dot(const double* a, const double* b, std::size_t n) { return state().ops.dot(a, b, n); }
double sumsq(const double* a, std::size_t n) { return state().ops.sumsq(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  state().ops.axpy(alpha, x, y, n);
}
void scale(double alpha, double* x, std::size_t n) { state().ops.scale(alpha, x, n); }

}  // namespace sbsvm::simd
