#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbsvm/kernels.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/simd.hpp"
#include "test_oracles.hpp"

using namespace sbsvm;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

std::vector<double> negated(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (auto& v : y) v = -v;
  return y;
}

}  // namespace

TEST_CASE("kp: closed forms and extended-precision agreement") {
  std::vector<double> x{1.0, 0.0}, y{0.0, 3.0};
  CHECK(kp(x, y, 6) == 1.0);  // orthogonal inputs

  std::vector<double> u{0.6, 0.8};  // unit norm
  CHECK(kp(u, u, 6) == 64.0);

  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    auto a = random_vec(rng, 17);
    auto b = random_vec(rng, 17);
    // long-double reference evaluation
    long double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      acc += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
    long double ref = 1;
    for (int t = 0; t < 6; ++t) ref *= (1.0L + acc);
    CHECK(kp(a, b, 6) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }

  std::vector<double> short_vec{1.0};
  CHECK_THROWS(kp(x, short_vec, 6));
}

TEST_CASE("kp_norm: self-similarity 2^theta exactly, scale invariance") {
  Rng rng(2);
  auto x = random_vec(rng, 31);
  CHECK(kp_norm(x, x, 6) == 64.0);  // exact, not approximate

  auto y = random_vec(rng, 31);
  auto scaled = x;
  simd::scale(17.5, scaled.data(), scaled.size());
  CHECK(kp_norm(scaled, y, 6) == doctest::Approx(kp_norm(x, y, 6)).epsilon(1e-12));

  CHECK(kp_norm(x, negated(x), 6) == doctest::Approx(0.0).epsilon(1e-12));  // (1-1)^theta

  std::vector<double> zero(31, 0.0);
  CHECK_THROWS(kp_norm(x, zero, 6));
  CHECK_THROWS(kp_norm(zero, x, 6));
}

TEST_CASE("ke: evenness in both arguments and self value") {
  Rng rng(3);
  auto x = random_vec(rng, 40);
  auto y = random_vec(rng, 40);
  CHECK(ke(x, y, 6) == ke(x, negated(y), 6));
  CHECK(ke(x, y, 6) == ke(negated(x), y, 6));
  CHECK(ke(x, x, 6) == 64.0);
}

TEST_CASE("komega: product structure and self closed form") {
  Rng rng(4);
  auto xs = random_vec(rng, 104);
  auto ys = random_vec(rng, 104);
  auto ox = random_vec(rng, 30);
  auto oy = random_vec(rng, 30);

  CHECK(komega(xs, ys, ox, oy, 6) ==
        doctest::Approx(ke(xs, ys, 6) * kp(ox, oy, 6)).epsilon(1e-14));

  // Orthogonal omega factors: the kp factor is exactly 1.
  std::vector<double> o1{1.0, 0.0}, o2{0.0, 2.0};
  CHECK(komega(xs, ys, o1, o2, 6) == doctest::Approx(ke(xs, ys, 6)).epsilon(1e-14));

  double self = komega(xs, xs, ox, ox, 6);
  CHECK(self == doctest::Approx(64.0 * ipow(1.0 + simd::sumsq(ox), 6)).epsilon(1e-12));

  std::vector<double> zeros(104, 0.0);
  CHECK(komega_or_zero(zeros, ys, ox, oy, 6) == 0.0);
  CHECK(komega_or_zero(xs, ys, ox, oy, 6) == komega(xs, ys, ox, oy, 6));
}

TEST_CASE("kernels: symmetry on random pairs") {
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    auto x = random_vec(rng, 23);
    auto y = random_vec(rng, 23);
    CHECK(kp(x, y, 6) == kp(y, x, 6));
    CHECK(kp_norm(x, y, 6) == kp_norm(y, x, 6));
    CHECK(ke(x, y, 6) == ke(y, x, 6));
    auto ox = random_vec(rng, 12);
    auto oy = random_vec(rng, 12);
    CHECK(komega(x, y, ox, oy, 6) == komega(y, x, oy, ox, 6));
  }
}

TEST_CASE("kernels: Gram matrices are PSD (eigen-decomposition oracle)") {
  Rng rng(6);
  const std::size_t n = 50;
  std::vector<std::vector<double>> xs, omegas;
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(random_vec(rng, 20));
    omegas.push_back(random_vec(rng, 8));
  }
  auto check_psd = [&](auto&& kf) {
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g.at(i, j) = kf(i, j);
    double trace = 0;
    for (std::size_t i = 0; i < n; ++i) trace += g.at(i, i);
    double min_eig = testing::min_eigenvalue_sym(g);
    CHECK(min_eig >= -1e-8 * trace / static_cast<double>(n));
  };
  check_psd([&](std::size_t i, std::size_t j) { return kp(xs[i], xs[j], 6); });
  check_psd([&](std::size_t i, std::size_t j) { return kp_norm(xs[i], xs[j], 6); });
  check_psd([&](std::size_t i, std::size_t j) { return ke(xs[i], xs[j], 6); });
  check_psd(
      [&](std::size_t i, std::size_t j) { return komega(xs[i], xs[j], omegas[i], omegas[j], 6); });
}

TEST_CASE("ipow matches std::pow for integer exponents") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    double x = rng.uniform(-3.0, 3.0);
    for (int e : {1, 2, 3, 6, 10})
      CHECK(ipow(x, e) == doctest::Approx(std::pow(x, e)).epsilon(1e-13));
  }
  CHECK(ipow(2.0, 0) == 1.0);
}
