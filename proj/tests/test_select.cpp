#include <gtest/gtest.h>

#include <numeric>

#include "sarc/annotate.hpp"
#include "sarc/select.hpp"
#include "sarc/synth.hpp"
#include "support/oracles.hpp"

using namespace sarc;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

}  // namespace

TEST(SelectedCount, Rounding) {
  EXPECT_EQ(selected_count(1.0, 133), 133u);
  EXPECT_EQ(selected_count(0.75, 133), 99u);
  EXPECT_EQ(selected_count(0.5, 133), 66u);
  EXPECT_EQ(selected_count(0.005, 133), 1u);
  EXPECT_THROW(selected_count(0.0, 133), ValidationError);
  EXPECT_THROW(selected_count(1.5, 133), ValidationError);
}

TEST(FeatureMask, KeepsMostImportant) {
  const std::vector<double> imp{0.1, 0.4, 0.3, 0.2};
  const auto m = make_mask(imp, 0.5);
  EXPECT_EQ(m.columns(), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(m.selected(), 2u);
}

TEST(FeatureMask, TiesGoToLowerIndex) {
  const std::vector<double> imp{0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(make_mask(imp, 0.5).columns(), (std::vector<std::size_t>{0, 1}));
  const std::vector<double> imp2{0.1, 0.3, 0.3, 0.3};
  EXPECT_EQ(make_mask(imp2, 0.5).columns(), (std::vector<std::size_t>{1, 2}));
}

TEST(FeatureMask, ApplyChecksWidth) {
  Rng rng(1);
  const auto x = oracle::random_matrix(5, 4, rng);
  const auto m = make_mask(std::vector<double>{0.1, 0.4, 0.3, 0.2}, 0.5);
  const auto y = apply_mask(x, m);
  ASSERT_EQ(y.cols(), 2u);
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(y(r, 0), x(r, 1));
    EXPECT_EQ(y(r, 1), x(r, 2));
  }
  EXPECT_THROW(apply_mask(oracle::random_matrix(5, 3, rng), m), ShapeError);
}

TEST(FeatureMask, FullFractionKeepsEverything) {
  std::vector<double> imp(133, 1.0 / 133.0);
  EXPECT_EQ(make_mask(imp, 1.0).selected(), 133u);
  EXPECT_EQ(make_mask(imp, 0.75).selected(), 99u);
}

TEST(RankFeatures, NeedsTwoClasses) {
  Rng rng(2);
  const auto x = oracle::random_matrix(20, 3, rng);
  std::vector<int> y(20, 0);
  y[19] = 1;
  const auto rows = all_rows(19);
  EXPECT_THROW(rank_features(x, y, rows, 2), ValidationError);
  EXPECT_NO_THROW(rank_features(x, y, all_rows(20), 2, RankParams{10, 0.0, 1}));
}

TEST(RankFeatures, ConstantColumnHasZeroImportance) {
  Rng rng(3);
  auto x = oracle::random_matrix(120, 5, rng);
  std::vector<int> y(120);
  for (std::size_t i = 0; i < 120; ++i) {
    x(i, 4) = 1.0;
    y[i] = x(i, 1) + 0.3 * x(i, 2) > 0.0 ? 1 : 0;
  }
  const auto r = rank_features(x, y, all_rows(120), 2, RankParams{100, 0.0, 4});
  EXPECT_EQ(r.importance.mean[4], 0.0);
  EXPECT_NEAR(std::accumulate(r.importance.mean.begin(), r.importance.mean.end(), 0.0), 1.0, 1e-9);
  EXPECT_EQ(std::max_element(r.importance.mean.begin(), r.importance.mean.end()) - r.importance.mean.begin(), 1);
}

TEST(RankFeatures, UsesOnlyGivenRows) {
  Rng rng(5);
  auto x = oracle::random_matrix(100, 3, rng);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = x(i, 0) > 0 ? 1 : 0;
  const auto rows = all_rows(50);
  const auto a = rank_features(x, y, rows, 2, RankParams{30, 0.0, 6}, 2);
  for (std::size_t i = 50; i < 100; ++i) x(i, 2) = 1e9 * static_cast<double>(y[i]);
  const auto b = rank_features(x, y, rows, 2, RankParams{30, 0.0, 6}, 2);
  EXPECT_EQ(a.importance.mean, b.importance.mean);
  EXPECT_EQ(a.fitted_fold, 2);
}

TEST(RankFeatures, SyntheticAccelerometerFeaturesRankHigh) {
  SynthConfig cfg;
  cfg.n_subjects = 2;
  cfg.reps_per_set = 6;
  cfg.rest_padding = 2.0;
  auto ds = generate_dataset(cfg);
  for (auto& r : ds.recordings) r = auto_annotate(std::move(r));
  const auto fm = extract_features(segment(ds.recordings, SegmentationSpec{}));
  const auto r = rank_features(fm, all_rows(fm.rows()), RankParams{250, 0.0, 7});
  EXPECT_NEAR(std::accumulate(r.importance.mean.begin(), r.importance.mean.end(), 0.0), 1.0, 1e-9);
  std::vector<std::size_t> order(r.importance.mean.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return r.importance.mean[a] > r.importance.mean[b]; });
  bool found = false;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& name = r.names[order[i]];
    const bool accel = name.starts_with("ax.") || name.starts_with("ay.") || name.starts_with("az.") ||
                       name.starts_with("ea.");
    found |= accel && (name.ends_with(".mean") || name.ends_with(".xi"));
  }
  EXPECT_TRUE(found) << ranking_csv(r).substr(0, 300);
}

TEST(RankingCsv, SortedByImportance) {
  FeatureRanking r{{"a", "b", "c"}, {{0.2, 0.5, 0.3}, {0.0, 0.1, 0.0}}, -1};
  const auto csv = ranking_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "feature,importance,std");
  EXPECT_LT(csv.find("\nb,"), csv.find("\nc,"));
  EXPECT_LT(csv.find("\nc,"), csv.find("\na,"));
}
