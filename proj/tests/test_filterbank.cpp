#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sbsvm/filterbank.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/simd.hpp"

using namespace sbsvm;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

// Direct evaluation of the analysis sum x^s[n] = sum_k x[k] g_s[nS-k] under
// the same padding convention; the production path uses reversed-filter dot
// products, so this is an independent route.
double analysis_coef_direct(std::span<const double> x, const CmfbBank& bank, int s, int n) {
  const int S = bank.S;
  double acc = 0;
  for (int k = 0; k < static_cast<int>(x.size()) + 2 * S; ++k) {
    double xv = (k >= S && k < S + static_cast<int>(x.size()))
                    ? x[static_cast<std::size_t>(k - S)]
                    : 0.0;
    int j = n * S - k;
    if (j >= 0 && j < 2 * S) acc += xv * bank.filters.at(static_cast<std::size_t>(s),
                                                         static_cast<std::size_t>(j));
  }
  return acc;
}

}  // namespace

TEST_CASE("design_cmfb: coefficients follow the closed form") {
  for (int S : {1, 2, 16}) {
    CmfbBank bank = design_cmfb(S);
    REQUIRE(bank.filters.rows == static_cast<std::size_t>(S));
    REQUIRE(bank.filters.cols == static_cast<std::size_t>(2 * S));
    for (int s = 1; s <= S; ++s)
      for (int k = 1; k <= 2 * S; ++k) {
        double proto = std::sqrt(2.0) * std::sin(std::numbers::pi * (k - 0.5) / (2.0 * S));
        double expected = proto / std::sqrt(double(S)) *
                          std::cos((2.0 * s - 1.0) * (2.0 * k - S - 1.0) * std::numbers::pi /
                                   (4.0 * S));
        CHECK(bank.filters.at(s - 1, k - 1) == doctest::Approx(expected).epsilon(1e-15));
      }
  }
  // S=1 degenerates to the identity transform [1, 0].
  CmfbBank b1 = design_cmfb(1);
  CHECK(b1.filters.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b1.filters.at(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS(design_cmfb(0));
}

TEST_CASE("design_cmfb: orthogonality across channels and shifts") {
  for (int S : {2, 4, 16, 32}) {
    CmfbBank bank = design_cmfb(S);
    double worst = 0;
    for (int m = -1; m <= 1; ++m)
      for (int s = 0; s < S; ++s)
        for (int sp = 0; sp < S; ++sp) {
          double acc = 0;
          for (int k = 0; k < 2 * S; ++k) {
            int j = k - m * S;
            if (j >= 0 && j < 2 * S)
              acc += bank.filters.at(static_cast<std::size_t>(s), static_cast<std::size_t>(k)) *
                     bank.filters.at(static_cast<std::size_t>(sp), static_cast<std::size_t>(j));
          }
          double target = (s == sp && m == 0) ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(acc - target));
        }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("analyze: zero input, energy conservation, linearity") {
  CmfbBank bank = design_cmfb(16);
  std::vector<double> zero(512, 0.0);
  SubbandSet sb = analyze(zero, bank);
  for (double v : sb.components.d) CHECK(v == 0.0);

  Rng rng(11);
  auto x = random_vec(rng, 1000);
  SubbandSet sx = analyze(x, bank);
  double sub_energy = simd::sumsq(sx.components.d.data(), sx.components.d.size());
  double energy = simd::sumsq(x.data(), x.size());
  CHECK(sub_energy / energy == doctest::Approx(1.0).epsilon(1e-9));

  auto y = random_vec(rng, 1000);
  SubbandSet sy = analyze(y, bank);
  std::vector<double> combo(1000);
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = 2.5 * x[i] - 0.5 * y[i];
  SubbandSet sc = analyze(combo, bank);
  for (std::size_t i = 0; i < sc.components.d.size(); ++i)
    CHECK(sc.components.d[i] ==
          doctest::Approx(2.5 * sx.components.d[i] - 0.5 * sy.components.d[i]).epsilon(1e-9));
}

TEST_CASE("analyze: matches the direct summation of the defining formula") {
  Rng rng(12);
  for (int S : {2, 8}) {
    CmfbBank bank = design_cmfb(S);
    auto x = random_vec(rng, 130);
    SubbandSet sb = analyze(x, bank);
    for (int s = 0; s < S; ++s)
      for (std::size_t n = 0; n < sb.components.cols; ++n)
        CHECK(sb.components.at(static_cast<std::size_t>(s), n) ==
              doctest::Approx(analysis_coef_direct(x, bank, s, static_cast<int>(n)))
                  .epsilon(1e-12));
  }
}

TEST_CASE("analyze: matched filter concentrates energy in its channel") {
  const int S = 16;
  CmfbBank bank = design_cmfb(S);
  // Input = reversed channel-1 filter with one leading zero, which places its
  // support exactly on the decimation grid: it is the basis function of
  // channel 1 at output index 3, so that coefficient is 1 and every other
  // coefficient is an inner product of orthogonal basis functions.
  std::vector<double> x(bank.filters.cols + 1, 0.0);
  for (std::size_t k = 0; k < bank.filters.cols; ++k)
    x[k + 1] = bank.filters.at(1, bank.filters.cols - 1 - k);
  SubbandSet sb = analyze(x, bank);
  double total = simd::sumsq(sb.components.d.data(), sb.components.d.size());
  double ch1 = simd::sumsq(sb.components.row(1).data(), sb.components.cols);
  CHECK(ch1 / total >= 0.99);
  CHECK(sb.components.at(1, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sb.components.at(1, 3) ==
        doctest::Approx(analysis_coef_direct(x, bank, 1, 3)).epsilon(1e-12));
}

TEST_CASE("synthesize: perfect reconstruction") {
  Rng rng(13);
  for (int S : {4, 16}) {
    CmfbBank bank = design_cmfb(S);
    auto x = random_vec(rng, 4096);
    SubbandSet sb = analyze(x, bank);
    auto xr = synthesize(sb, bank);
    REQUIRE(xr.size() == x.size());
    double max_abs = 0, max_err = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      max_abs = std::max(max_abs, std::abs(x[i]));
      max_err = std::max(max_err, std::abs(x[i] - xr[i]));
    }
    CHECK(max_err < 1e-9 * max_abs);
  }
}

TEST_CASE("synthesize: impulse round trip and S mismatch error") {
  CmfbBank bank = design_cmfb(8);
  std::vector<double> x(64, 0.0);
  x[20] = 1.0;
  auto xr = synthesize(analyze(x, bank), bank);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(xr[i] == doctest::Approx(x[i]).epsilon(1e-12));

  CmfbBank other = design_cmfb(4);
  SubbandSet sb = analyze(x, bank);
  CHECK_THROWS(synthesize(sb, other));
}

TEST_CASE("synthesize: zeroing one subband removes exactly its energy") {
  const int S = 16;
  CmfbBank bank = design_cmfb(S);
  Rng rng(14);
  auto x = random_vec(rng, 2048);
  SubbandSet sb = analyze(x, bank);
  double band_energy = simd::sumsq(sb.components.row(3).data(), sb.components.cols);
  for (auto& v : sb.components.row(3)) v = 0.0;
  auto xr = synthesize(sb, bank);
  double residual = 0;
  for (std::size_t i = 0; i < x.size(); ++i) residual += (x[i] - xr[i]) * (x[i] - xr[i]);
  CHECK(residual == doctest::Approx(band_energy).epsilon(1e-9));
}
