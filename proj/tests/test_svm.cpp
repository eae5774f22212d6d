#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbsvm/kernels.hpp"
#include "sbsvm/rng.hpp"
#include "sbsvm/simd.hpp"
#include "sbsvm/svm.hpp"
#include "test_oracles.hpp"

using namespace sbsvm;

namespace {

Matrix linear_gram(const std::vector<std::vector<double>>& pts) {
  Matrix g(pts.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      g.at(i, j) = simd::dot(pts[i].data(), pts[j].data(), pts[i].size());
  return g;
}

Matrix poly_gram(const std::vector<std::vector<double>>& pts, int theta) {
  Matrix g(pts.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) g.at(i, j) = kp(pts[i], pts[j], theta);
  return g;
}

double model_score(const BinarySvmModel& m, const std::vector<std::vector<double>>& pts,
                   std::span<const double> x, int theta, bool poly) {
  std::vector<double> kv(m.support.size());
  for (std::size_t j = 0; j < kv.size(); ++j) {
    const auto& sv = pts[static_cast<std::size_t>(m.support[j])];
    kv[j] = poly ? kp(sv, x, theta) : simd::dot(sv.data(), x.data(), x.size());
  }
  return svm_score(m, kv);
}

}  // namespace

TEST_CASE("smo: two-point analytic solution") {
  // Points at distance 2 on an axis, C large: the margin boundary bisects the
  // pair, alpha_1 = alpha_2 = 1/|x1-x2|^2 * 2 = 0.5, w = (1, 0), b = -2.
  std::vector<std::vector<double>> pts{{1.0, 0.0}, {3.0, 0.0}};
  std::vector<int> y{-1, 1};
  DenseGram gram(linear_gram(pts));
  SvmTrainOptions opt;
  opt.C = 1e6;
  opt.tol = 1e-9;
  DualSolution sol = smo_train(gram, y, opt);
  CHECK(sol.alpha[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sol.alpha[1] == doctest::Approx(sol.alpha[0]).epsilon(1e-9));
  // decision surface x = 2: h(2,0) = 0
  BinarySvmModel m = make_model(sol, y, {}, KernelParams{KernelKind::poly, 1}, opt.C);
  std::vector<double> mid{2.0, 0.0};
  CHECK(model_score(m, pts, mid, 1, false) == doctest::Approx(0.0).epsilon(1e-6));
  std::vector<double> probe{4.0, 0.0};
  CHECK(model_score(m, pts, probe, 1, false) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("smo: XOR with quadratic polynomial kernel has zero training error") {
  std::vector<std::vector<double>> pts{{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  std::vector<int> y{1, 1, -1, -1};
  DenseGram gram(poly_gram(pts, 2));
  SvmTrainOptions opt;
  DualSolution sol = smo_train(gram, y, opt);
  BinarySvmModel m = make_model(sol, y, {}, KernelParams{KernelKind::poly, 2}, opt.C);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double s = model_score(m, pts, pts[i], 2, true);
    CHECK(s * y[i] > 0);
  }
}

TEST_CASE("smo: duplicated dataset gives the same decision function") {
  Rng rng(31);
  std::vector<std::vector<double>> pts;
  std::vector<int> y;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> p{rng.normal(), rng.normal()};
    int label = p[0] + 0.5 * p[1] + 0.3 * rng.normal() > 0 ? 1 : -1;
    pts.push_back(p);
    y.push_back(label);
  }
  std::vector<std::vector<double>> pts2(pts);
  pts2.insert(pts2.end(), pts.begin(), pts.end());
  std::vector<int> y2(y);
  y2.insert(y2.end(), y.begin(), y.end());

  DenseGram g1(poly_gram(pts, 2)), g2(poly_gram(pts2, 2));
  SvmTrainOptions opt;
  opt.tol = 1e-6;
  DualSolution s1 = smo_train(g1, y, opt);
  DualSolution s2 = smo_train(g2, y2, opt);
  BinarySvmModel m1 = make_model(s1, y, {}, KernelParams{KernelKind::poly, 2}, opt.C);
  BinarySvmModel m2 = make_model(s2, y2, {}, KernelParams{KernelKind::poly, 2}, opt.C);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> probe{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    CHECK(model_score(m1, pts, probe, 2, true) ==
          doctest::Approx(model_score(m2, pts2, probe, 2, true)).epsilon(5e-3));
  }
}

TEST_CASE("smo: matches the projected-gradient QP oracle on random problems") {
  Rng rng(32);
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform_int(0, 15));
    std::vector<std::vector<double>> pts;
    std::vector<int> y;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({rng.normal(), rng.normal(), rng.normal()});
      int label = rng.uniform() < 0.5 ? -1 : 1;
      (label > 0 ? pos : neg) = true;
      y.push_back(label);
    }
    if (!pos || !neg) {
      y[0] = -y[0];
    }
    int theta = rep % 3 == 0 ? 1 : (rep % 3 == 1 ? 2 : 6);
    Matrix k = theta == 1 ? linear_gram(pts) : poly_gram(pts, theta);
    DenseGram gram(k);
    SvmTrainOptions opt;
    opt.tol = 1e-8;
    DualSolution sol = smo_train(gram, y, opt);
    auto oracle = testing::qp_oracle(k, y, opt.C);
    CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-6));

    // Dual feasibility invariants.
    double balance = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(sol.alpha[i] >= -1e-12);
      CHECK(sol.alpha[i] <= opt.C + 1e-12);
      balance += sol.alpha[i] * y[i];
    }
    CHECK(std::abs(balance) < 1e-8);
  }
}

TEST_CASE("smo: margin condition on free support vectors, label flip symmetry") {
  Rng rng(33);
  std::vector<std::vector<double>> pts;
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    std::vector<double> p{rng.normal(), rng.normal()};
    pts.push_back(p);
    y.push_back(p[0] + 0.8 * rng.normal() > 0 ? 1 : -1);
  }
  DenseGram gram(poly_gram(pts, 2));
  SvmTrainOptions opt;
  opt.tol = 1e-6;
  DualSolution sol = smo_train(gram, y, opt);
  BinarySvmModel m = make_model(sol, y, {}, KernelParams{KernelKind::poly, 2}, opt.C);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (sol.alpha[i] > 1e-9 && sol.alpha[i] < opt.C - 1e-9) {
      double s = model_score(m, pts, pts[i], 2, true);
      CHECK(std::abs(s) == doctest::Approx(1.0).epsilon(1e-3));
    }
  }

  std::vector<int> yf(y);
  for (auto& v : yf) v = -v;
  DualSolution solf = smo_train(gram, yf, opt);
  BinarySvmModel mf = make_model(solf, yf, {}, KernelParams{KernelKind::poly, 2}, opt.C);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> probe{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    CHECK(model_score(mf, pts, probe, 2, true) ==
          doctest::Approx(-model_score(m, pts, probe, 2, true)).epsilon(1e-4));
  }
}

TEST_CASE("smo: rejects single-class input and bad labels") {
  std::vector<std::vector<double>> pts{{1, 0}, {2, 0}};
  Matrix k = linear_gram(pts);
  DenseGram gram(k);
  std::vector<int> same{1, 1};
  CHECK_THROWS(smo_train(gram, same, SvmTrainOptions{}));
  std::vector<int> bad{1, 2};
  CHECK_THROWS(smo_train(gram, bad, SvmTrainOptions{}));
}

TEST_CASE("svm_score: empty support set returns the bias") {
  BinarySvmModel m;
  m.b = 0.7;
  CHECK(svm_score(m, {}) == 0.7);
}

TEST_CASE("train_linear: sign, dual-score identity, noise down-weighting") {
  std::vector<std::vector<double>> pts{{-1.0}, {1.0}};
  std::vector<int> y{-1, 1};
  LinearSvmModel m = train_linear(pts, y);
  CHECK(m.w[0] > 0);

  // Materialized w reproduces dual scoring on probes.
  Rng rng(41);
  std::vector<std::vector<double>> pts2;
  std::vector<int> y2;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> p{rng.normal(), rng.normal(), rng.normal()};
    pts2.push_back(p);
    y2.push_back(p[0] - p[2] + 0.4 * rng.normal() > 0 ? 1 : -1);
  }
  LinearSvmModel lm = train_linear(pts2, y2, 1.0, 1e-8);
  DenseGram gram(linear_gram(pts2));
  SvmTrainOptions opt;
  opt.tol = 1e-8;
  DualSolution sol = smo_train(gram, y2, opt);
  BinarySvmModel dm = make_model(sol, y2, {}, KernelParams{KernelKind::poly, 1}, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> probe{rng.normal(), rng.normal(), rng.normal()};
    double lin = linear_score(lm, probe);
    std::vector<double> kv(dm.support.size());
    for (std::size_t j = 0; j < kv.size(); ++j)
      kv[j] = simd::dot(pts2[static_cast<std::size_t>(dm.support[j])].data(), probe.data(), 3);
    CHECK(lin == doctest::Approx(svm_score(dm, kv)).epsilon(1e-8));
  }

  // A pure-noise coordinate gets less weight than the signal coordinate.
  int wins = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng r2(static_cast<std::uint64_t>(100 + seed));
    std::vector<std::vector<double>> p3;
    std::vector<int> y3;
    for (int i = 0; i < 60; ++i) {
      double signal = r2.uniform() < 0.5 ? -1.0 : 1.0;
      p3.push_back({signal + 0.1 * r2.normal(), r2.normal()});
      y3.push_back(signal > 0 ? 1 : -1);
    }
    LinearSvmModel m3 = train_linear(p3, y3);
    if (std::abs(m3.w[1]) < std::abs(m3.w[0])) ++wins;
  }
  CHECK(wins == 20);
}
