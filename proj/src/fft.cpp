#include "sbsvm/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

#include "sbsvm/util.hpp"

namespace sbsvm {

namespace {

// FFTW planning is not thread-safe; plans are cached per (size, direction)
// and executed with the new-array interface on fftw_malloc'd buffers.
std::mutex plan_mu;
std::map<std::pair<std::size_t, int>, fftw_plan> plan_cache;

fftw_plan plan_for(std::size_t n, int sign, fftw_complex* in, fftw_complex* out) {
  std::lock_guard lk(plan_mu);
  auto key = std::make_pair(n, sign);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_cache.emplace(key, p);
  return p;
}

struct Buf {
  fftw_complex* p;
  explicit Buf(std::size_t n) : p(fftw_alloc_complex(n)) {}
  ~Buf() { fftw_free(p); }
  Buf(const Buf&) = delete;
  Buf& operator=(const Buf&) = delete;
};

std::vector<std::complex<double>> run(std::span<const std::complex<double>> in, std::size_t n,
                                      int sign) {
  Buf a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.p[i][0] = i < in.size() ? in[i].real() : 0.0;
    a.p[i][1] = i < in.size() ? in[i].imag() : 0.0;
  }
  fftw_plan p = plan_for(n, sign, a.p, b.p);
  fftw_execute_dft(p, a.p, b.p);
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {b.p[i][0], b.p[i][1]};
  return out;
}

}  // namespace

std::vector<std::complex<double>> fft_real(std::span<const double> x, std::size_t nfft) {
  require(nfft > 0, "fft: nfft must be positive");
  std::vector<std::complex<double>> in(nfft);
  for (std::size_t i = 0; i < nfft && i < x.size(); ++i) in[i] = x[i];
  return run(in, nfft, FFTW_FORWARD);
}

std::vector<double> ifft_to_real(std::span<const std::complex<double>> spectrum) {
  std::size_t n = spectrum.size();
  require(n > 0, "ifft: empty spectrum");
  auto full = run(spectrum, n, FFTW_BACKWARD);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = full[i].real() / static_cast<double>(n);
  return out;
}

std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft) {
  auto spec = fft_real(x, nfft);
  std::vector<double> p(nfft / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(spec[k]);
  return p;
}

}  // namespace sbsvm
