#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "sbsvm/fft.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/signal.hpp"
#include "sbsvm/simd.hpp"

using namespace sbsvm;

namespace {

double mean_square(std::span<const double> x) {
  return simd::sumsq(x.data(), x.size()) / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("normalize_unit_energy") {
  std::vector<double> c(100, 0.5);
  auto y = normalize_unit_energy(c);
  for (double v : y) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(1);
  std::vector<double> x(999);
  for (auto& v : x) v = rng.normal() * 3.7;
  auto n = normalize_unit_energy(x);
  CHECK(mean_square(n) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> flipped(x);
  for (auto& v : flipped) v = -v;
  auto nf = normalize_unit_energy(flipped);
  for (std::size_t i = 0; i < n.size(); ++i) CHECK(nf[i] == doctest::Approx(-n[i]).epsilon(1e-12));

  std::vector<double> zeros(10, 0.0);
  CHECK_THROWS(normalize_unit_energy(zeros));
}

TEST_CASE("mix_at_snr: exact mean-square scaling and determinism") {
  Rng rng(2);
  std::vector<double> clean(8000);
  for (auto& v : clean) v = rng.normal();
  clean = normalize_unit_energy(clean);

  for (double snr : {0.0, 20.0, -6.0}) {
    NoiseSpec spec;
    spec.kind = NoiseKind::white;
    spec.seed = 77;
    auto noisy = mix_at_snr(clean, spec, snr);
    std::vector<double> noise(noisy.size());
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = noisy[i] - clean[i];
    double achieved = 10.0 * std::log10(mean_square(clean) / mean_square(noise));
    CHECK(achieved == doctest::Approx(snr).epsilon(1e-9));
    CHECK(mean_square(noise) == doctest::Approx(std::pow(10.0, -snr / 10.0)).epsilon(1e-9));
  }

  NoiseSpec spec;
  spec.seed = 5;
  auto a = mix_at_snr(clean, spec, 6.0);
  auto b = mix_at_snr(clean, spec, 6.0);
  CHECK(a == b);
}

TEST_CASE("gen_noise: white moments") {
  auto w = gen_noise(NoiseKind::white, 1000000, 42);
  double mean = 0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(w.size());
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(mean_square(w) - 1.0) < 0.01);
  CHECK(gen_noise(NoiseKind::white, 1, 1).size() == 1);
  CHECK(std::isfinite(gen_noise(NoiseKind::white, 1, 1)[0]));
}

TEST_CASE("gen_noise: pink PSD slope is -3 dB/octave") {
  const std::size_t n = 1 << 16;
  const double fs = 16000.0;
  auto p = gen_noise(NoiseKind::pink, n, 9);
  CHECK(mean_square(p) == doctest::Approx(1.0).epsilon(1e-9));

  // Periodogram averaged in octave bands 16..4096 Hz, least-squares slope in
  // dB per octave against log2 of the band center.
  auto power = power_spectrum(p, n);
  std::vector<double> xs, ys;
  for (double lo = 16.0; lo < 4096.0; lo *= 2.0) {
    double hi = 2.0 * lo, acc = 0;
    std::size_t count = 0;
    for (std::size_t k = 1; k < power.size(); ++k) {
      double f = static_cast<double>(k) * fs / static_cast<double>(n);
      if (f >= lo && f < hi) {
        acc += power[k];
        ++count;
      }
    }
    REQUIRE(count > 0);
    xs.push_back(std::log2(std::sqrt(lo * hi)));
    ys.push_back(10.0 * std::log10(acc / static_cast<double>(count)));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = num / den;
  CHECK(slope == doctest::Approx(-3.0103).epsilon(0.5 / 3.0103));
}

TEST_CASE("convolve_rir: identity, delay, linearity") {
  Rng rng(3);
  std::vector<double> x(500);
  for (auto& v : x) v = rng.normal();

  Rir unit{{1.0}, "unit"};
  auto y = convolve_rir(x, unit);
  CHECK(y == x);

  Rir delayed{{0.0, 0.0, 0.0, 1.0}, "d3"};
  auto yd = convolve_rir(x, delayed);
  for (std::size_t i = 0; i < 3; ++i) CHECK(yd[i] == 0.0);
  for (std::size_t i = 3; i < x.size(); ++i) CHECK(yd[i] == doctest::Approx(x[i - 3]));

  Rir r = make_synthetic_rir(0.05, 4, "r");
  auto y1 = convolve_rir(x, r);
  std::vector<double> x2(x);
  for (auto& v : x2) v *= 2.0;
  auto y2 = convolve_rir(x2, r);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(y2[i] == doctest::Approx(2.0 * y1[i]).epsilon(1e-12));

  Rir empty{{}, "empty"};
  CHECK_THROWS(convolve_rir(x, empty));
}

TEST_CASE("spectral_coloration: impulse flat, AM-GM negativity, direct oracle") {
  Rir unit{{1.0}, "unit"};
  CHECK(spectral_coloration(unit) == doctest::Approx(0.0).epsilon(1e-12));

  Rir two{{1.0, 0.9}, "two"};
  double got = spectral_coloration(two);
  CHECK(got < 0.0);

  // Independent direct-summation DTFT on the same 8192-point grid.
  const std::size_t nfft = kColorationFftBins;
  double log_sum = 0, lin_sum = 0;
  for (std::size_t k = 0; k < nfft; ++k) {
    std::complex<double> h = 0;
    for (std::size_t t = 0; t < two.taps.size(); ++t)
      h += two.taps[t] *
           std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) /
                               static_cast<double>(nfft));
    log_sum += std::log(std::abs(h));
    lin_sum += std::abs(h);
  }
  double expected = 20.0 * std::log10(std::exp(log_sum / nfft) / (lin_sum / nfft));
  CHECK(got == doctest::Approx(expected).epsilon(1e-9));

  Rir reference = make_synthetic_rir(0.2, 1, "ref");
  CHECK(spectral_coloration(reference) < 0.0);
}

TEST_CASE("estimate_noise_variance") {
  auto noise = gen_noise(NoiseKind::white, 48000, 21);  // 3 s at sigma^2 = 1
  double est = estimate_noise_variance(noise);
  CHECK(est > 0.5);
  CHECK(est < 1.5);

  NoiseVarianceMethod known;
  known.kind = NoiseVarianceMethod::Kind::known;
  known.known_value = 0.1234;
  CHECK(estimate_noise_variance(noise, known) == 0.1234);

  std::vector<double> tiny(10, 1.0);
  CHECK_THROWS(estimate_noise_variance(tiny));
}

TEST_CASE("reference RIRs: distinct, T60-scaled, peak-normalized") {
  auto [r, rp] = make_reference_rirs();
  CHECK(r.taps.size() == rp.taps.size());
  CHECK(r.taps != rp.taps);
  for (const auto& rir : {r, rp}) {
    double peak = 0;
    for (double t : rir.taps) peak = std::max(peak, std::abs(t));
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
    // Amplitude envelope decays by ~60 dB across T60 = 0.2 s = 3200 samples.
    double head = 0, tail = 0;
    for (std::size_t i = 1; i < 200; ++i) head = std::max(head, std::abs(rir.taps[i]));
    for (std::size_t i = 3100; i < 3300 && i < rir.taps.size(); ++i)
      tail = std::max(tail, std::abs(rir.taps[i]));
    CHECK(20.0 * std::log10(tail / head) < -40.0);
  }
}
