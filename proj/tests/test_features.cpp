#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "sarc/features.hpp"
#include "support/oracles.hpp"

using namespace sarc;

namespace {

std::vector<double> window_from_rows(const std::vector<std::array<double, 6>>& rows) {
  std::vector<double> w;
  for (const auto& r : rows) w.insert(w.end(), r.begin(), r.end());
  return w;
}

WindowTensor random_tensor(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Recording> recs;
  for (std::size_t i = 0; i < 3; ++i) {
    auto r = oracle::random_recording(100 + n * 10, rng, Interval{0, 100 + n * 10});
    r.id = "r" + std::to_string(i);
    r.side = i % 2 ? Side::LEFT : Side::RIGHT;
    recs.push_back(std::move(r));
  }
  return segment(recs, SegmentationSpec{2.0, 0.9, 50.0});
}

}  // namespace

TEST(FeatureNames, CountAndLayout) {
  const auto names = feature_names();
  ASSERT_EQ(names.size(), 133u);
  EXPECT_EQ(names.front(), "ax.mean");
  EXPECT_EQ(names[8], "ax.xi");
  EXPECT_EQ(names[104], "corr.ax.ay");
  EXPECT_EQ(names.back(), "side");
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 133u);
}

TEST(EnergyVectors, SquaredNorms) {
  const auto w = window_from_rows({{1, 2, 2, 0, 3, 4}, {0, 0, 1, 1, 0, 0}});
  const auto e = energy_vectors(w);
  EXPECT_EQ(e.accel, (std::vector<double>{9, 1}));
  EXPECT_EQ(e.gyro, (std::vector<double>{25, 1}));
}

TEST(SpectralEnergy, SmallVectors) {
  const std::vector<double> ones{1, 1, 1, 1}, zeros(4, 0.0), alt{1, -1, 1, -1};
  EXPECT_NEAR(spectral_energy(ones), 4.0, 1e-12);
  EXPECT_EQ(spectral_energy(zeros), 0.0);
  EXPECT_NEAR(spectral_energy(alt), 4.0, 1e-12);
}

TEST(SpectralEnergy, AgreesWithDirectDft) {
  Rng rng(41);
  for (std::size_t n : {2u, 7u, 64u, 100u, 127u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal(0.3, 2.0);
    EXPECT_NEAR(spectral_energy(x), oracle::dft_energy(x), 1e-10 * oracle::dft_energy(x)) << n;
    EXPECT_NEAR(spectral_energy(x), oracle::sum_squares(x), 1e-10 * oracle::sum_squares(x)) << n;
  }
}

TEST(Univariate, Alternating) {
  const std::vector<double> x{1, -1, 1, -1};
  const auto f = univariate_features(x);
  EXPECT_EQ(f[0], 0.0);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
  EXPECT_DOUBLE_EQ(f[2], 1.0);
  EXPECT_EQ(f[3], 1.0);
  EXPECT_EQ(f[4], -1.0);
  EXPECT_NEAR(f[5], 0.0, 1e-15);
  EXPECT_NEAR(f[6], -2.0, 1e-12);
  EXPECT_EQ(f[7], 3.0);
  EXPECT_NEAR(f[8], 4.0, 1e-12);
  EXPECT_EQ((std::array<double, 4>{f[9], f[10], f[11], f[12]}), (std::array<double, 4>{2, 0, 0, 2}));
}

TEST(Univariate, ConstantVector) {
  const std::vector<double> x(50, 2.5);
  const auto f = univariate_features(x);
  EXPECT_EQ(f[0], 2.5);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[2], 0.0);
  EXPECT_EQ(f[5], 0.0);
  EXPECT_EQ(f[6], 0.0);
  EXPECT_EQ(f[7], 0.0);
  EXPECT_EQ(f[9], 50.0);
  EXPECT_EQ(f[10] + f[11] + f[12], 0.0);
  EXPECT_NEAR(f[8], 50.0 * 6.25, 1e-9);
}

TEST(Univariate, HistogramCountsEverySample) {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(2 + rng.below(200));
    for (auto& v : x) v = rng.normal();
    const auto f = univariate_features(x);
    EXPECT_EQ(f[9] + f[10] + f[11] + f[12], static_cast<double>(x.size()));
    EXPECT_GE(f[12], 1.0);
    EXPECT_GE(f[9], 1.0);
    const auto want = oracle::univariate(x);
    for (std::size_t k = 0; k < kNumUnivariate; ++k) EXPECT_TRUE(oracle::close(f[k], want[k], 1e-9)) << k;
  }
}

TEST(Univariate, TooShort) {
  const std::vector<double> x{1.0};
  EXPECT_THROW(univariate_features(x), ValidationError);
}

TEST(Pearson, PerfectAndDegenerate) {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1}, c{5, 5, 5, 5};
  EXPECT_DOUBLE_EQ(pearson(x, y), 1.0);
  EXPECT_DOUBLE_EQ(pearson(x, z), -1.0);
  EXPECT_EQ(pearson(x, c), 0.0);
  EXPECT_EQ(pearson(c, c), 0.0);
}

TEST(Pearson, BoundedOnRandomData) {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(30), y(30);
    for (std::size_t i = 0; i < 30; ++i) {
      x[i] = rng.normal();
      y[i] = 0.8 * x[i] + 0.2 * rng.normal();
    }
    const double r = pearson(x, y);
    EXPECT_LE(std::abs(r), 1.0);
    EXPECT_NEAR(r, oracle::pearson(x, y), 1e-12);
  }
}

TEST(WindowFeatures, ZeroWindowOnRightSide) {
  const std::vector<double> w(100 * 6, 0.0);
  const auto f = window_features(w, Side::RIGHT);
  const auto names = feature_names();
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    const bool hist0 = names[k].ends_with(".hist0");
    if (hist0)
      EXPECT_EQ(f[k], 100.0) << names[k];
    else if (names[k] == "side")
      EXPECT_EQ(f[k], 1.0);
    else
      EXPECT_EQ(f[k], 0.0) << names[k];
  }
  EXPECT_EQ(window_features(w, Side::LEFT).back(), 0.0);
}

TEST(WindowFeatures, MatchesOracle) {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::random_matrix(100, 6, rng, -2.0, 2.0);
    const auto f = window_features(x.data(), Side::LEFT);
    const auto want = oracle::window_features(x.data(), Side::LEFT);
    for (std::size_t k = 0; k < kNumFeatures; ++k) EXPECT_TRUE(oracle::close(f[k], want[k], 1e-9)) << k;
  }
}

TEST(ExtractFeatures, BatchEqualsSingleWindow) {
  const auto wt = random_tensor(20, 45);
  const auto fm = extract_features(wt);
  ASSERT_EQ(fm.rows(), wt.size());
  ASSERT_EQ(fm.cols(), 133u);
  EXPECT_EQ(fm.labels, wt.labels);
  for (std::size_t i = 0; i < wt.size(); ++i) {
    const auto f = window_features(wt.window(i), wt.side(i));
    const auto row = fm.values.row(i);
    EXPECT_TRUE(std::equal(f.begin(), f.end(), row.begin())) << i;
  }
}

TEST(Scaling, StandardizesFittedRows) {
  Rng rng(46);
  auto x = oracle::random_matrix(200, 5, rng, -3.0, 7.0);
  for (std::size_t r = 0; r < x.rows(); ++r) x(r, 2) = 4.0;
  std::vector<std::size_t> rows(200);
  std::iota(rows.begin(), rows.end(), 0);
  const auto s = fit_scaling(x, rows, 3);
  EXPECT_EQ(s.fitted_fold, 3);
  const auto z = apply_scaling(x, s);
  for (std::size_t j = 0; j < 5; ++j) {
    double m = 0.0, v = 0.0;
    for (std::size_t r = 0; r < 200; ++r) m += z(r, j);
    m /= 200.0;
    for (std::size_t r = 0; r < 200; ++r) v += (z(r, j) - m) * (z(r, j) - m);
    v /= 200.0;
    EXPECT_NEAR(m, 0.0, 1e-12) << j;
    if (j == 2) {
      for (std::size_t r = 0; r < 200; ++r) EXPECT_EQ(z(r, j), 0.0);
    } else {
      EXPECT_NEAR(v, 1.0, 1e-12) << j;
    }
  }
}

TEST(Scaling, IgnoresRowsOutsideTheFit) {
  Rng rng(47);
  auto x = oracle::random_matrix(100, 4, rng);
  const std::vector<std::size_t> train{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto before = fit_scaling(x, train);
  for (std::size_t r = 10; r < 100; ++r)
    for (std::size_t j = 0; j < 4; ++j) x(r, j) = 1e6;
  EXPECT_EQ(fit_scaling(x, train), before);
  EXPECT_THROW(fit_scaling(x, std::vector<std::size_t>{}), ValidationError);
}
