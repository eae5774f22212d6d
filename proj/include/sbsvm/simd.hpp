#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace sbsvm::simd {

enum class Backend { scalar, avx2 };

// Backend in effect. Resolved once: AVX2+FMA if the CPU has them, unless the
// SBSVM_SIMD environment variable ("scalar", "avx2", "auto") says otherwise.
Backend active_backend();
std::string_view backend_name();

// Override the dispatch (tests). Throws std::runtime_error if the requested
// backend is not available on this CPU.
void force_backend(Backend b);
bool backend_available(Backend b);

// Hot arithmetic primitives. All results depend only on the active backend
// and the inputs; within one backend the accumulation order is fixed.
double dot(const double* a, const double* b, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void scale(double alpha, double* x, std::size_t n);                 // x *= alpha

inline double dot(std::span<const double> a, std::span<const double> b) {
  return dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}
inline double sumsq(std::span<const double> a) { return sumsq(a.data(), a.size()); }

// Reference kernels; always built, used as the oracle half of the
// scalar/SIMD equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace sbsvm::simd
