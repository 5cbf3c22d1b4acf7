#include <gtest/gtest.h>

#include "sarc/classifiers.hpp"
#include "support/oracles.hpp"

using namespace sarc;

namespace {

struct Blobs {
  Matrix x;
  std::vector<int> y;
};

Blobs blobs(std::size_t per_class, std::size_t classes, double spread, std::uint64_t seed) {
  Rng rng(seed);
  Blobs b{Matrix(per_class * classes, 2), {}};
  for (std::size_t c = 0; c < classes; ++c) {
    const double cx = 4.0 * std::cos(2.0 * 3.141592653589793 * static_cast<double>(c) / static_cast<double>(classes));
    const double cy = 4.0 * std::sin(2.0 * 3.141592653589793 * static_cast<double>(c) / static_cast<double>(classes));
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = c * per_class + i;
      b.x(r, 0) = rng.normal(cx, spread);
      b.x(r, 1) = rng.normal(cy, spread);
      b.y.push_back(static_cast<int>(c));
    }
  }
  return b;
}

double accuracy(std::span<const int> a, std::span<const int> b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

}  // namespace

TEST(Knn, KOneRecallsTrainingSet) {
  Rng rng(1);
  const auto x = oracle::random_matrix(60, 4, rng);
  std::vector<int> y(60);
  for (auto& v : y) v = static_cast<int>(rng.below(7));
  const auto m = knn_fit(x, y, 1, 7);
  EXPECT_EQ(knn_predict(m, x), y);
}

TEST(Knn, KEqualsNGivesMajority) {
  Rng rng(2);
  const auto x = oracle::random_matrix(9, 3, rng);
  const std::vector<int> y{0, 1, 1, 2, 1, 0, 2, 1, 1};
  const auto m = knn_fit(x, y, 9, 3);
  for (int p : knn_predict(m, oracle::random_matrix(20, 3, rng, -5.0, 5.0))) EXPECT_EQ(p, 1);
}

TEST(Knn, InvalidK) {
  const Matrix x(3, 1, std::vector<double>{0, 1, 2});
  const std::vector<int> y{0, 1, 0};
  EXPECT_THROW(knn_fit(x, y, 0, 2), ValidationError);
  EXPECT_THROW(knn_fit(x, y, 4, 2), ValidationError);
  EXPECT_NO_THROW(knn_fit(x, y, 3, 2));
}

TEST(Knn, TwoPoints) {
  const Matrix x(2, 2, std::vector<double>{0, 0, 10, 10});
  const std::vector<int> y{0, 1};
  const auto m = knn_fit(x, y, 1, 2);
  const Matrix q(3, 2, std::vector<double>{1, 1, 9, 9, 4, 4});
  EXPECT_EQ(knn_predict(m, q), (std::vector<int>{0, 1, 0}));
}

TEST(Knn, EquidistantTieGoesToLowestClass) {
  const Matrix x(2, 1, std::vector<double>{-1, 1});
  const Matrix q(1, 1, std::vector<double>{0});
  EXPECT_EQ(knn_predict(knn_fit(x, std::vector<int>{1, 0}, 2, 2), q), (std::vector<int>{0}));
  EXPECT_EQ(knn_predict(knn_fit(x, std::vector<int>{0, 1}, 2, 2), q), (std::vector<int>{0}));
  // With k = 1 the equidistant neighbour with the lower row index wins.
  EXPECT_EQ(knn_predict(knn_fit(x, std::vector<int>{1, 0}, 1, 2), q), (std::vector<int>{1}));
}

TEST(Knn, MatchesSortOracle) {
  Rng rng(3);
  for (std::size_t k : {1u, 3u, 8u, 30u}) {
    const auto x = oracle::random_matrix(120, 5, rng);
    std::vector<int> y(120);
    for (auto& v : y) v = static_cast<int>(rng.below(4));
    const auto q = oracle::random_matrix(50, 5, rng);
    EXPECT_EQ(knn_predict(knn_fit(x, y, k, 4), q), oracle::knn_predict(x, y, q, k, 4)) << k;
  }
}

TEST(Knn, NeighboursOrderedByDistance) {
  Rng rng(4);
  const auto x = oracle::random_matrix(40, 3, rng);
  const auto q = oracle::random_matrix(5, 3, rng);
  const auto m = knn_fit(x, std::vector<int>(40, 0), 10, 1);
  const auto nb = knn_neighbors(m, q, 10);
  auto dist = [&](std::size_t i, std::size_t r) {
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) s += (x(i, j) - q(r, j)) * (x(i, j) - q(r, j));
    return s;
  };
  for (std::size_t r = 0; r < 5; ++r) {
    ASSERT_EQ(nb[r].size(), 10u);
    for (std::size_t j = 1; j < 10; ++j) EXPECT_LE(dist(nb[r][j - 1], r), dist(nb[r][j], r));
  }
}

TEST(Svc, SeparableBlobs) {
  const auto b = blobs(40, 2, 0.7, 5);
  SvcParams p;
  p.gamma = 0.5;
  p.tol = 1e-5;
  const auto m = svc_fit(b.x, b.y, p);
  EXPECT_EQ(accuracy(svc_predict(m, b.x), b.y), 1.0);

  std::vector<double> yy(b.y.size());
  for (std::size_t i = 0; i < yy.size(); ++i) yy[i] = b.y[i] == 0 ? 1.0 : -1.0;
  const auto r = smo_solve(b.x, yy, p);
  EXPECT_TRUE(r.converged);
  const auto chk = oracle::dual_check(b.x, yy, r.alpha, p.C, p.gamma);
  EXPECT_LE(chk.kkt, 1e-4);
  EXPECT_LE(chk.box, 0.0);
  EXPECT_LE(chk.equality, 1e-10);
}

TEST(Svc, DecisionMatchesDualExpansion) {
  const auto b = blobs(25, 2, 1.5, 6);
  SvcParams p;
  p.gamma = 0.3;
  p.C = 2.0;
  std::vector<double> yy(b.y.size());
  for (std::size_t i = 0; i < yy.size(); ++i) yy[i] = b.y[i] == 0 ? 1.0 : -1.0;
  const auto r = smo_solve(b.x, yy, p);
  const auto m = svc_fit(b.x, b.y, p);
  Rng rng(7);
  const auto q = oracle::random_matrix(30, 2, rng, -6.0, 6.0);
  const auto dec = svc_decision(m, q);
  for (std::size_t i = 0; i < q.rows(); ++i)
    EXPECT_NEAR(dec(i, 0), oracle::decision(b.x, yy, r.alpha, r.rho, q.row(i), p.gamma), 1e-9);
}

TEST(Svc, FlippedLabelsNegateDecision) {
  const auto b = blobs(30, 2, 1.2, 8);
  SvcParams p;
  p.gamma = 0.5;
  p.tol = 1e-6;
  std::vector<int> flipped(b.y.size());
  for (std::size_t i = 0; i < flipped.size(); ++i) flipped[i] = 1 - b.y[i];
  const auto d1 = svc_decision(svc_fit(b.x, b.y, p), b.x);
  const auto d2 = svc_decision(svc_fit(b.x, flipped, p), b.x);
  for (std::size_t i = 0; i < b.x.rows(); ++i) EXPECT_NEAR(d1(i, 0), -d2(i, 0), 1e-3);
}

TEST(Svc, SevenClassesUseTwentyOneMachines) {
  const auto b = blobs(12, 7, 0.4, 9);
  SvcParams p;
  p.gamma = 0.5;
  const auto m = svc_fit(b.x, b.y, p);
  EXPECT_EQ(m.machines.size(), 21u);
  EXPECT_EQ(m.classes.size(), 7u);
  EXPECT_EQ(svc_decision(m, b.x).cols(), 21u);
  EXPECT_GE(accuracy(svc_predict(m, b.x), b.y), 0.95);
}

TEST(Svc, TwoClassPredictionIsDecisionSign) {
  const auto b = blobs(30, 2, 2.5, 10);
  SvcParams p;
  p.gamma = 0.2;
  const auto m = svc_fit(b.x, b.y, p);
  Rng rng(11);
  const auto q = oracle::random_matrix(100, 2, rng, -8.0, 8.0);
  const auto dec = svc_decision(m, q);
  const auto pred = svc_predict(m, q);
  for (std::size_t i = 0; i < q.rows(); ++i)
    EXPECT_EQ(pred[i], dec(i, 0) > 0 ? m.machines[0].positive : m.machines[0].negative);
}

TEST(Svc, NeedsTwoClasses) {
  const auto b = blobs(10, 1, 1.0, 12);
  EXPECT_THROW(svc_fit(b.x, b.y, SvcParams{}), ValidationError);
}
