#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sarc/features.hpp"
#include "sarc/trees.hpp"

namespace sarc {

struct RankParams {
  std::size_t n_estimators = 250;
  double max_features_fraction = 0.0;  // 0: sqrt(d) / d
  std::uint64_t seed = 0;
};

struct FeatureRanking {
  std::vector<std::string> names;
  Importance importance;
  int fitted_fold = -1;
};

struct FeatureMask {
  std::vector<bool> keep;
  double fraction = 1.0;
  std::vector<double> importance;
  int fitted_fold = -1;

  std::size_t selected() const { return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true)); }
  std::vector<std::size_t> columns() const {
    std::vector<std::size_t> c;
    for (std::size_t j = 0; j < keep.size(); ++j)
      if (keep[j]) c.push_back(j);
    return c;
  }
  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;
};

/// max(1, floor(fraction * d)).
inline std::size_t selected_count(double fraction, std::size_t d) {
  require(fraction > 0.0 && fraction <= 1.0, "feature fraction must be in (0, 1]");
  // Guard against floor(0.75 * 133) landing just below an integer.
  const auto n = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(d) + 1e-9));
  return std::clamp<std::size_t>(n, 1, d);
}

/// Extra-trees Gini importance over `rows` of an unscaled or scaled matrix.
inline FeatureRanking rank_features(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                    std::size_t n_classes, const RankParams& p = {}, int fold = -1) {
  require(!rows.empty(), "ranking needs at least one row");
  std::vector<int> yr;
  yr.reserve(rows.size());
  for (auto r : rows) yr.push_back(y[r]);
  std::vector<int> distinct = yr;
  std::sort(distinct.begin(), distinct.end());
  if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2)
    throw ValidationError("feature ranking needs rows from at least 2 classes");
  const Matrix xr = x.select_rows(rows);
  const double frac =
      p.max_features_fraction > 0.0 ? p.max_features_fraction : std::sqrt(static_cast<double>(x.cols())) / static_cast<double>(x.cols());
  const auto forest = fit_forest(xr, yr, n_classes, ForestParams::extra_trees(p.n_estimators, frac, p.seed));
  return FeatureRanking{{}, gini_importance(forest), fold};
}

inline FeatureRanking rank_features(const FeatureMatrix& fm, std::span<const std::size_t> rows, const RankParams& p = {},
                                    int fold = -1) {
  std::vector<int> y;
  for (auto c : fm.labels) y.push_back(static_cast<int>(c));
  auto r = rank_features(fm.values, y, rows, kNumClasses, p, fold);
  r.names = fm.names;
  return r;
}

/// Keeps the top max(1, floor(fraction * d)) features; ties go to the lower index.
inline FeatureMask make_mask(std::span<const double> importance, double fraction, int fold = -1) {
  const std::size_t d = importance.size();
  require(d > 0, "empty importance vector");
  const std::size_t n = selected_count(fraction, d);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
  FeatureMask m{std::vector<bool>(d, false), fraction, {importance.begin(), importance.end()}, fold};
  for (std::size_t i = 0; i < n; ++i) m.keep[order[i]] = true;
  return m;
}

inline Matrix apply_mask(const Matrix& x, const FeatureMask& mask) {
  if (mask.keep.size() != x.cols())
    throw ShapeError("mask length " + std::to_string(mask.keep.size()) + " does not match " + std::to_string(x.cols()) +
                     " columns");
  return x.select_cols(mask.columns());
}

inline FeatureMatrix apply_mask(const FeatureMatrix& fm, const FeatureMask& mask) {
  FeatureMatrix out = fm;
  out.values = apply_mask(fm.values, mask);
  out.names.clear();
  for (auto j : mask.columns()) out.names.push_back(fm.names[j]);
  if (fm.scaling) {
    ScalingStats s{{}, {}, fm.scaling->fitted_fold};
    for (auto j : mask.columns()) {
      s.mean.push_back(fm.scaling->mean[j]);
      s.std.push_back(fm.scaling->std[j]);
    }
    out.scaling = s;
  }
  return out;
}

/// CSV rows `feature,importance,std`, sorted by decreasing importance.
inline std::string ranking_csv(const FeatureRanking& r) {
  std::vector<std::size_t> order(r.importance.mean.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.importance.mean[a] > r.importance.mean[b]; });
  std::string out = "feature,importance,std\n";
  for (auto j : order) {
    out += j < r.names.size() ? r.names[j] : "f" + std::to_string(j);
    out += ',';
    append_decimal9(out, r.importance.mean[j]);
    out += ',';
    append_decimal9(out, r.importance.std[j]);
    out += '\n';
  }
  return out;
}

}  // namespace sarc
