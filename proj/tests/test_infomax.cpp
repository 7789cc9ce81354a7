#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "herogcn/herogcn.hpp"
#include "support.hpp"

using namespace herogcn;
using testing_support::random_matrix;

namespace {

std::vector<std::vector<double>> sorted_rows(const Matrix<double>& m) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) rows.emplace_back(m.row(i).begin(), m.row(i).end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST(Corrupt, TwoRowsSeeded) {
  Matrix<double> x{{1, 2}, {3, 4}};
  const auto a = corrupt(x, 5);
  EXPECT_TRUE(a == x || a == (Matrix<double>{{3, 4}, {1, 2}}));
  EXPECT_EQ(a, corrupt(x, 5));
}

TEST(Corrupt, PreservesRowMultisetAndColumnSums) {
  std::mt19937_64 rng(1);
  const auto x = random_matrix(25, 6, rng);
  std::vector<std::size_t> perm;
  const auto y = corrupt_rows(x, rng, &perm);
  EXPECT_EQ(sorted_rows(x), sorted_rows(y));
  for (std::size_t j = 0; j < 6; ++j) {
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < 25; ++i) {
      sx += x(i, j);
      sy += y(i, j);
    }
    EXPECT_NEAR(sx, sy, 1e-12);
  }
  for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(y(i, 0), x(perm[i], 0));
}

TEST(Corrupt, NeedsTwoRows) { EXPECT_THROW(corrupt(Matrix<double>(1, 3), 1), ConfigError); }

TEST(Samples, SingleLayerUnchanged) {
  std::mt19937_64 rng(2);
  Tape<double> t;
  auto h = t.constant(random_matrix(5, 3, rng));
  auto z = t.constant(random_matrix(5, 3, rng));
  auto s = build_samples<double>({h, t.constant(Matrix<double>(5, 2))}, {z, t.constant(Matrix<double>(5, 2))}, 1);
  EXPECT_EQ(s.positives.value(), h.value());
  EXPECT_EQ(s.negatives.value(), z.value());
}

TEST(Samples, ConcatenationAndSummary) {
  std::mt19937_64 rng(3);
  Tape<double> t;
  const auto h1 = random_matrix(7, 2, rng), h2 = random_matrix(7, 3, rng);
  auto s = build_samples<double>({t.constant(h1), t.constant(h2)}, {t.constant(h1), t.constant(h2)}, 2);
  ASSERT_EQ(s.positives.cols(), 5u);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(s.positives.value()(i, 1), h1(i, 1));
    EXPECT_EQ(s.positives.value()(i, 4), h2(i, 2));
  }
  for (std::size_t j = 0; j < 5; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 7; ++i) mean += s.positives.value()(i, j);
    EXPECT_NEAR(s.summary.value()(0, j), mean / 7.0, 1e-12);
  }
}

TEST(Samples, IdenticalRowsGiveThatRow) {
  Tape<double> t;
  Matrix<double> h(4, 3);
  for (std::size_t i = 0; i < 4; ++i) h.row(i)[0] = 0.2, h.row(i)[1] = -1.0, h.row(i)[2] = 3.0;
  auto s = build_samples<double>({t.constant(h)}, {t.constant(h)}, 1);
  EXPECT_EQ(s.summary.value(), (Matrix<double>{{0.2, -1.0, 3.0}}));
}

TEST(Samples, TooManyLayersRejected) {
  Tape<double> t;
  auto h = t.constant(Matrix<double>(3, 2));
  EXPECT_THROW(build_samples<double>({h}, {h}, 2), ConfigError);
}

TEST(Discriminator, HandValues) {
  Tape<double> t;
  auto h = t.constant(Matrix<double>{{0, 1, 0}});
  EXPECT_EQ(discriminate(h, h, t.constant(Matrix<double>(3, 3))).item(), 0.5);
  Matrix<double> eye{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  EXPECT_NEAR(discriminate(h, h, t.constant(eye)).item(), 0.7310585786300049, 1e-15);
}

TEST(Discriminator, ScoringGradient) {
  std::mt19937_64 rng(4);
  const auto h = random_matrix(6, 4, rng), g = random_matrix(1, 4, rng);
  Parameter<double> ws("ws", random_matrix(4, 4, rng));
  auto report = testing_support::gradient_check({&ws}, [&](bool bw) {
    Tape<double> t;
    auto loss = sum(discriminate(t.constant(h), t.constant(g), t.parameter(ws)));
    if (bw) t.backward(loss);
    return loss.item();
  });
  EXPECT_LT(testing_support::worst(report), 1e-5);
}

TEST(InfomaxLoss, ChanceLevelIsLn2) {
  std::mt19937_64 rng(5);
  Tape<double> t;
  auto pos = t.constant(random_matrix(8, 3, rng));
  SamplePair<double> pair{pos, t.constant(random_matrix(8, 3, rng)), mean_rows(pos)};
  EXPECT_NEAR(infomax_loss(pair, t.constant(Matrix<double>(3, 3))).item(), std::numbers::ln2, 1e-15);
}

TEST(InfomaxLoss, SaturatedScoresNearZeroAndClamped) {
  Tape<double> t;
  auto pos = t.constant(Matrix<double>{{10, 0}, {10, 0}});
  auto neg = t.constant(Matrix<double>{{-10, 0}});
  SamplePair<double> pair{pos, neg, mean_rows(pos)};
  const double l = infomax_loss(pair, t.constant(Matrix<double>{{1, 0}, {0, 1}})).item();
  EXPECT_GE(l, 0.0);
  EXPECT_LT(l, 1e-6);
  EXPECT_TRUE(std::isfinite(l));
}

TEST(InfomaxLoss, DirectBceSummation) {
  std::mt19937_64 rng(6);
  const auto h = random_matrix(7, 3, rng), z = random_matrix(5, 3, rng), w = random_matrix(3, 3, rng);
  Tape<double> t;
  auto pos = t.constant(h);
  SamplePair<double> pair{pos, t.constant(z), mean_rows(pos)};
  const double value = infomax_loss(pair, t.constant(w)).item();
  std::vector<double> g(3, 0.0);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 3; ++j) g[j] += h(i, j) / 7.0;
  auto score = [&](const Matrix<double>& m, std::size_t i) {
    double s = 0.0;
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) s += m(i, a) * w(a, b) * g[b];
    return 1.0 / (1.0 + std::exp(-s));
  };
  double bce = 0.0;
  for (std::size_t i = 0; i < 7; ++i) bce += std::log(score(h, i));
  for (std::size_t j = 0; j < 5; ++j) bce += std::log(1.0 - score(z, j));
  EXPECT_NEAR(value, -bce / 12.0, 1e-10);
}

TEST(InfomaxLoss, NonnegativeOnRandomInputs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Tape<double> t;
    auto pos = t.constant(random_matrix(6, 4, rng, -3, 3));
    SamplePair<double> pair{pos, t.constant(random_matrix(6, 4, rng, -3, 3)), mean_rows(pos)};
    EXPECT_GE(infomax_loss(pair, t.constant(random_matrix(4, 4, rng, -3, 3))).item(), 0.0);
  }
}

TEST(Infomax, ConcatenatedWidth) {
  EXPECT_EQ(concatenated_width({100, 500, 500, 2000, 10}, 3), 3000u);
  EXPECT_THROW(concatenated_width({7, 5, 3}, 3), ConfigError);
  EXPECT_THROW(concatenated_width({7, 5, 3}, 0), ConfigError);
}
