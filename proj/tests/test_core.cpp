#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "sbsvm/fft.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/simd.hpp"
#include "sbsvm/wav.hpp"

using namespace sbsvm;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("simd: avx2 kernels match the scalar references") {
  if (!simd::backend_available(simd::Backend::avx2)) return;  // nothing to compare on this CPU
  Rng rng(7);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 31u, 100u, 257u, 1600u}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    double mag = 1.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(simd::avx2::dot(a.data(), b.data(), n) - simd::scalar::dot(a.data(), b.data(), n)) <=
          1e-13 * mag);
    CHECK(std::abs(simd::avx2::sumsq(a.data(), n) - simd::scalar::sumsq(a.data(), n)) <=
          1e-13 * mag);
    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    simd::avx2::axpy(0.37, a.data(), y1.data(), n);
    simd::scalar::axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));
    auto s1 = a, s2 = a;
    simd::avx2::scale(-1.7, s1.data(), n);
    simd::scalar::scale(-1.7, s2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s1[i] == s2[i]);
  }
}

TEST_CASE("simd: dot(a,a) is bitwise sumsq(a) within each backend") {
  Rng rng(8);
  auto a = random_vec(rng, 1203);
  CHECK(simd::scalar::dot(a.data(), a.data(), a.size()) == simd::scalar::sumsq(a.data(), a.size()));
  if (simd::backend_available(simd::Backend::avx2))
    CHECK(simd::avx2::dot(a.data(), a.data(), a.size()) == simd::avx2::sumsq(a.data(), a.size()));
}

TEST_CASE("simd: forced backend switches dispatch") {
  auto original = simd::active_backend();
  simd::force_backend(simd::Backend::scalar);
  CHECK(simd::backend_name() == "scalar");
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(simd::dot(a.data(), b.data(), 3) == 32.0);
  simd::force_backend(original);
}

TEST_CASE("rng: deterministic and stable across instances") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(124);
  CHECK(a.next_u64() != c.next_u64());
  CHECK(derive_seed(1, "x") != derive_seed(1, "y"));
  CHECK(derive_seed(1, "x") == derive_seed(1, "x"));
  CHECK(derive_seed(2, "x") != derive_seed(1, "x"));
}

TEST_CASE("rng: uniform in range, normal has the right moments") {
  Rng rng(99);
  double sum = 0, sumsq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("fft: matches a direct DFT") {
  Rng rng(5);
  for (std::size_t n : {8u, 12u, 64u, 100u}) {
    auto x = random_vec(rng, n);
    auto spec = fft_real(x, n);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> direct = 0;
      for (std::size_t t = 0; t < n; ++t)
        direct += x[t] * std::polar(1.0, -2.0 * std::numbers::pi *
                                             static_cast<double>(k * t % n) / static_cast<double>(n));
      CHECK(std::abs(spec[k] - direct) < 1e-9);
    }
    auto back = ifft_to_real(spec);
    for (std::size_t t = 0; t < n; ++t) CHECK(back[t] == doctest::Approx(x[t]).epsilon(1e-12));
  }
}

TEST_CASE("wav: 16-bit mono round trip is sample-exact") {
  Rng rng(3);
  std::vector<double> x(777);
  for (auto& v : x) v = std::round(rng.uniform(-0.9, 0.9) * 32768.0) / 32768.0;
  auto path = std::filesystem::temp_directory_path() / "sbsvm_test.wav";
  write_wav(path, x, 16000);
  WavData w = read_wav(path);
  CHECK(w.sample_rate == 16000);
  REQUIRE(w.samples.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(w.samples[i] == doctest::Approx(x[i]).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("wav: rejects non-wav and stereo-ish garbage") {
  auto path = std::filesystem::temp_directory_path() / "sbsvm_bad.wav";
  {
    std::ofstream f(path, std::ios::binary);
    f << "not a riff file at all";
  }
  CHECK_THROWS(read_wav(path));
  std::filesystem::remove(path);
}
