#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "sbsvm/multiclass.hpp"
#include "sbsvm/rng.hpp"

using namespace sbsvm;

namespace {

// Full double loop over (m, n) including the chi(0) terms that the production
// decoder drops as class-independent constants.
int decode_brute(std::span<const double> scores, const CodingMatrix& w, DecodeLoss loss) {
  int best = -1;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int m = 0; m < w.M; ++m) {
    double total = 0;
    for (int n = 0; n < w.N(); ++n)
      total += decode_loss_value(loss, w.w(m, n) * scores[static_cast<std::size_t>(n)]);
    if (total < best_loss) {
      best_loss = total;
      best = m;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("build_pairwise: structure") {
  CHECK_THROWS(build_pairwise(1));
  CodingMatrix c3 = build_pairwise(3);
  CHECK(c3.N() == 3);
  CHECK(c3.columns == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});

  CodingMatrix c48 = build_pairwise(48);
  CHECK(c48.N() == 1128);

  for (int M : {2, 5, 9}) {
    CodingMatrix c = build_pairwise(M);
    CHECK(c.N() == M * (M - 1) / 2);
    for (int m = 0; m < M; ++m) {
      int nonzeros = 0, plus = 0, minus = 0;
      for (int n = 0; n < c.N(); ++n) {
        int w = c.w(m, n);
        if (w != 0) ++nonzeros;
        if (w == 1) ++plus;
        if (w == -1) ++minus;
      }
      CHECK(nonzeros == M - 1);
      CHECK(plus + minus == M - 1);
    }
    // each column has exactly one +1 and one -1
    for (int n = 0; n < c.N(); ++n) {
      int plus = 0, minus = 0;
      for (int m = 0; m < M; ++m) {
        if (c.w(m, n) == 1) ++plus;
        if (c.w(m, n) == -1) ++minus;
      }
      CHECK(plus == 1);
      CHECK(minus == 1);
    }
  }
}

TEST_CASE("hinge loss values") {
  CHECK(decode_loss_value(DecodeLoss::hinge, 0.5) == 0.5);
  CHECK(decode_loss_value(DecodeLoss::hinge, 2.0) == 0.0);
  CHECK(decode_loss_value(DecodeLoss::hinge, -1.0) == 2.0);
}

TEST_CASE("decode: perfectly separated class wins") {
  CodingMatrix c = build_pairwise(3);
  // class 2 beats 0 and 1 with margin; problem (0,1) slightly favors 0.
  std::vector<double> scores(3);
  scores[0] = 0.3;    // (0,1)
  scores[1] = -2.0;   // (0,2): negative = class 2
  scores[2] = -2.0;   // (1,2): negative = class 2
  CHECK(ecoc_decode(scores, c, DecodeLoss::hinge) == 2);
}

TEST_CASE("decode: agrees with the brute-force double loop for every loss") {
  Rng rng(9);
  for (int M : {3, 6, 10}) {
    CodingMatrix c = build_pairwise(M);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> scores(static_cast<std::size_t>(c.N()));
      for (auto& s : scores) s = rng.normal() * 2.0;
      for (auto loss : {DecodeLoss::hinge, DecodeLoss::hamming, DecodeLoss::exponential,
                        DecodeLoss::linear}) {
        CHECK(ecoc_decode(scores, c, loss) == decode_brute(scores, c, loss));
      }
    }
  }
}

TEST_CASE("decode: positive rescaling invariance for hamming and linear") {
  Rng rng(10);
  CodingMatrix c = build_pairwise(6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> scores(static_cast<std::size_t>(c.N()));
    for (auto& s : scores) s = rng.normal();
    std::vector<double> scaled(scores);
    double a = rng.uniform(0.1, 10.0);
    for (auto& s : scaled) s *= a;
    for (auto loss : {DecodeLoss::hamming, DecodeLoss::linear})
      CHECK(ecoc_decode(scores, c, loss) == ecoc_decode(scaled, c, loss));
  }
}

TEST_CASE("decode: permutation of columns together with scores is invariant") {
  Rng rng(11);
  const int M = 5;
  CodingMatrix c = build_pairwise(M);
  std::vector<double> scores(static_cast<std::size_t>(c.N()));
  for (auto& s : scores) s = rng.normal();

  CodingMatrix shuffled = c;
  std::vector<std::size_t> perm(scores.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  std::vector<double> shuffled_scores(scores.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.columns[i] = c.columns[perm[i]];
    shuffled_scores[i] = scores[perm[i]];
  }
  for (auto loss : {DecodeLoss::hinge, DecodeLoss::exponential})
    CHECK(ecoc_decode(scores, c, loss) == ecoc_decode(shuffled_scores, shuffled, loss));
}

TEST_CASE("decode: hinge recovers the true class from margin-consistent scores") {
  Rng rng(12);
  const int M = 8;
  CodingMatrix c = build_pairwise(M);
  for (int truth = 0; truth < M; ++truth) {
    std::vector<double> scores(static_cast<std::size_t>(c.N()));
    for (int n = 0; n < c.N(); ++n) {
      auto [i, j] = c.columns[static_cast<std::size_t>(n)];
      if (i == truth)
        scores[static_cast<std::size_t>(n)] = 1.0 + rng.uniform();
      else if (j == truth)
        scores[static_cast<std::size_t>(n)] = -1.0 - rng.uniform();
      else
        scores[static_cast<std::size_t>(n)] = rng.normal();  // irrelevant problems
    }
    CHECK(ecoc_decode(scores, c, DecodeLoss::hinge) == truth);
  }
}

TEST_CASE("decode: NaN score is an error; ties break to the lowest class") {
  CodingMatrix c = build_pairwise(3);
  std::vector<double> nan_scores{0.0, std::nan(""), 0.0};
  CHECK_THROWS(ecoc_decode(nan_scores, c, DecodeLoss::hinge));
  std::vector<double> zeros{0.0, 0.0, 0.0};  // fully symmetric
  CHECK(ecoc_decode(zeros, c, DecodeLoss::hinge) == 0);
}
