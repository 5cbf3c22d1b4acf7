#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sarc/matrix.hpp"
#include "sarc/parallel.hpp"
#include "sarc/random.hpp"

namespace sarc {

enum class ForestMode : std::uint8_t { RandomForest = 0, ExtraTrees = 1 };

struct TreeParams {
  ForestMode mode = ForestMode::RandomForest;
  double max_features_fraction = 1.0;
  std::size_t max_depth = 0;  // 0: unlimited
  std::size_t min_samples_split = 2;
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

/// Split (feature >= 0) or leaf (feature == -1). `weight` is the weighted
/// sample count reaching the node and `impurity` its Gini impurity.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double weight = 0.0;
  double impurity = 0.0;
  std::int32_t value_offset = -1;  // leaves: offset of the class counts in DecisionTree::leaf_counts
  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<TreeNode> nodes;
  std::vector<double> leaf_counts;

  const TreeNode& leaf_for(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i];
  }
  std::span<const double> counts(const TreeNode& leaf) const {
    return {leaf_counts.data() + leaf.value_offset, n_classes};
  }
  /// Normalized class distribution of the leaf reached by x.
  std::vector<double> predict_proba(std::span<const double> x) const {
    const auto& leaf = leaf_for(x);
    const auto c = counts(leaf);
    std::vector<double> p(c.begin(), c.end());
    double s = 0.0;
    for (double v : p) s += v;
    for (auto& v : p) v /= s;
    return p;
  }
  int predict(std::span<const double> x) const {
    const auto c = counts(leaf_for(x));
    return static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
  }
  std::size_t split_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return !n.is_leaf(); }));
  }
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

namespace tree_detail {

/// Column-major copy of the design matrix so split search reads contiguous memory.
struct Columns {
  std::size_t n = 0, d = 0;
  std::vector<double> data;
  explicit Columns(const Matrix& x) : n(x.rows()), d(x.cols()), data(x.rows() * x.cols()) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) data[j * n + i] = x(i, j);
  }
  const double* col(std::size_t j) const noexcept { return data.data() + j * n; }
};

inline double gini(std::span<const double> counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += c * c;
  return std::max(0.0, 1.0 - s / (total * total));
}

class Builder {
 public:
  Builder(const Columns& x, std::span<const int> y, std::span<const double> weight, std::size_t n_classes,
          const TreeParams& params, Rng& rng)
      : x_(x), y_(y), w_(weight), k_(n_classes), params_(params), rng_(rng) {}

  DecisionTree build() {
    DecisionTree tree;
    tree.n_classes = k_;
    tree.n_features = x_.d;
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < x_.n; ++i)
      if (w_[i] > 0.0) idx.push_back(static_cast<std::uint32_t>(i));
    require(!idx.empty(), "cannot fit a tree on empty data");

    struct Task {
      std::size_t node, begin, end, depth;
    };
    std::vector<Task> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, idx.size(), 0});
    std::vector<double> counts(k_);
    features_.resize(x_.d);

    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      std::fill(counts.begin(), counts.end(), 0.0);
      for (std::size_t p = task.begin; p < task.end; ++p) counts[static_cast<std::size_t>(y_[idx[p]])] += w_[idx[p]];
      double total = 0.0;
      for (double c : counts) total += c;
      TreeNode& node = tree.nodes[task.node];
      node.weight = total;
      node.impurity = gini(counts, total);

      const std::size_t n_node = task.end - task.begin;
      const bool depth_capped = params_.max_depth > 0 && task.depth >= params_.max_depth;
      Split split;
      if (node.impurity > 0.0 && n_node >= params_.min_samples_split && !depth_capped)
        split = find_split(std::span(idx).subspan(task.begin, n_node), counts, total);

      if (!split.valid) {
        node.value_offset = static_cast<std::int32_t>(tree.leaf_counts.size());
        tree.leaf_counts.insert(tree.leaf_counts.end(), counts.begin(), counts.end());
        continue;
      }
      const double* col = x_.col(split.feature);
      const auto mid_it = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                         idx.begin() + static_cast<std::ptrdiff_t>(task.end),
                                         [&](std::uint32_t i) { return col[i] <= split.threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - idx.begin());
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& parent = tree.nodes[task.node];  // re-fetch: emplace_back may reallocate
      parent.feature = static_cast<std::int32_t>(split.feature);
      parent.threshold = split.threshold;
      parent.left = left;
      parent.right = left + 1;
      stack.push_back({static_cast<std::size_t>(left + 1), mid, task.end, task.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), task.begin, mid, task.depth + 1});
    }
    return tree;
  }

 private:
  struct Split {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double proxy = -1.0;  // sum_c L_c^2 / W_L + sum_c R_c^2 / W_R; larger is better
  };

  static bool better(const Split& cand, const Split& best) {
    if (!best.valid) return true;
    if (cand.proxy != best.proxy) return cand.proxy > best.proxy;
    if (cand.feature != best.feature) return cand.feature < best.feature;
    return cand.threshold < best.threshold;
  }

  /// Visits features in random order until `m` of them admit a partition of
  /// the node (constant features do not count against the budget).
  Split find_split(std::span<const std::uint32_t> idx, std::span<const double> counts, double total) {
    const std::size_t d = x_.d;
    const auto m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(params_.max_features_fraction * static_cast<double>(d) + 1e-9)));
    for (std::size_t j = 0; j < d; ++j) features_[j] = j;
    Split best;
    std::size_t evaluated = 0;
    for (std::size_t drawn = 0; drawn < d && evaluated < m; ++drawn) {
      const std::size_t pick = drawn + static_cast<std::size_t>(rng_.below(d - drawn));
      std::swap(features_[drawn], features_[pick]);
      const std::size_t f = features_[drawn];
      Split cand = params_.mode == ForestMode::RandomForest ? best_threshold(f, idx, counts, total)
                                                            : random_threshold(f, idx, counts, total);
      if (!cand.valid) continue;
      ++evaluated;
      if (better(cand, best)) best = cand;
    }
    return best;
  }

  Split best_threshold(std::size_t f, std::span<const std::uint32_t> idx, std::span<const double> counts,
                       double total) {
    const double* col = x_.col(f);
    buf_.resize(idx.size());
    for (std::size_t p = 0; p < idx.size(); ++p) buf_[p] = {col[idx[p]], idx[p]};
    std::sort(buf_.begin(), buf_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Split best;
    if (buf_.front().first == buf_.back().first) return best;
    left_.assign(k_, 0.0);
    double wl = 0.0;
    double sq_total = 0.0;
    for (double c : counts) sq_total += c * c;
    // Maintain sum of squares incrementally: moving weight w of class c from
    // right to left changes L_c^2 and R_c^2 by closed-form deltas.
    double sq_left = 0.0, sq_right = sq_total;
    for (std::size_t p = 0; p + 1 < buf_.size(); ++p) {
      const auto i = buf_[p].second;
      const auto c = static_cast<std::size_t>(y_[i]);
      const double w = w_[i];
      const double lc = left_[c], rc = counts[c] - lc;
      sq_left += w * (2.0 * lc + w);
      sq_right -= w * (2.0 * rc - w);
      left_[c] = lc + w;
      wl += w;
      const double v = buf_[p].first, next = buf_[p + 1].first;
      if (!(v < next)) continue;
      const double wr = total - wl;
      const double proxy = sq_left / wl + sq_right / wr;
      if (!best.valid || proxy > best.proxy) {
        double thr = v + (next - v) * 0.5;
        if (!(thr < next)) thr = v;
        best = Split{true, f, thr, proxy};
      }
    }
    return best;
  }

  Split random_threshold(std::size_t f, std::span<const std::uint32_t> idx, std::span<const double> counts,
                         double total) {
    const double* col = x_.col(f);
    double lo = col[idx[0]], hi = lo;
    for (auto i : idx) {
      lo = std::min(lo, col[i]);
      hi = std::max(hi, col[i]);
    }
    Split s;
    if (!(lo < hi)) return s;
    double thr = lo + (hi - lo) * rng_.uniform();
    if (!(thr < hi)) thr = lo;
    left_.assign(k_, 0.0);
    double wl = 0.0;
    for (auto i : idx)
      if (col[i] <= thr) {
        left_[static_cast<std::size_t>(y_[i])] += w_[i];
        wl += w_[i];
      }
    const double wr = total - wl;
    double sl = 0.0, sr = 0.0;
    for (std::size_t c = 0; c < k_; ++c) {
      const double r = counts[c] - left_[c];
      sl += left_[c] * left_[c];
      sr += r * r;
    }
    return Split{true, f, thr, sl / wl + sr / wr};
  }

  const Columns& x_;
  std::span<const int> y_;
  std::span<const double> w_;
  std::size_t k_;
  TreeParams params_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, std::uint32_t>> buf_;
  std::vector<double> left_;
};

inline void check_labels(std::span<const int> y, std::size_t n_classes, std::size_t rows) {
  require(y.size() == rows, "label count does not match row count");
  for (int v : y) require(v >= 0 && static_cast<std::size_t>(v) < n_classes, "label out of range");
}

}  // namespace tree_detail

/// Grows one Gini tree on all rows with unit weights. Splits send
/// x[feature] <= threshold left. Growth stops at purity, when no candidate
/// feature can partition the node, or at the optional depth cap.
inline DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::size_t n_classes, const TreeParams& params,
                             Rng& rng) {
  if (x.rows() == 0 || x.cols() == 0) throw ValidationError("cannot fit a tree on empty data");
  tree_detail::check_labels(y, n_classes, x.rows());
  const tree_detail::Columns cols(x);
  const std::vector<double> w(x.rows(), 1.0);
  return tree_detail::Builder(cols, y, w, n_classes, params, rng).build();
}

// ---------------------------------------------------------------------------
// Forests
// ---------------------------------------------------------------------------

struct ForestParams {
  std::size_t n_estimators = 150;
  double max_features_fraction = 0.10;
  bool bootstrap = true;
  ForestMode mode = ForestMode::RandomForest;
  std::uint64_t seed = 0;
  std::size_t max_depth = 0;
  std::size_t min_samples_split = 2;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;

  /// Extremely randomized trees: full sample per tree, random thresholds.
  static ForestParams extra_trees(std::size_t n, double max_features_fraction, std::uint64_t seed) {
    return ForestParams{n, max_features_fraction, false, ForestMode::ExtraTrees, seed, 0, 2};
  }
};

struct ForestModel {
  ForestParams params;
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<DecisionTree> trees;
  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

/// Each tree draws from its own stream keyed by (seed, tree index), so the
/// forest does not depend on the number of threads.
inline ForestModel fit_forest(const Matrix& x, std::span<const int> y, std::size_t n_classes, const ForestParams& p) {
  if (x.rows() == 0 || x.cols() == 0) throw ValidationError("cannot fit a forest on empty data");
  require(p.n_estimators >= 1, "n_estimators must be >= 1");
  require(p.max_features_fraction > 0.0 && p.max_features_fraction <= 1.0, "max_features_fraction must be in (0, 1]");
  tree_detail::check_labels(y, n_classes, x.rows());
  const tree_detail::Columns cols(x);
  ForestModel model{p, n_classes, x.cols(), std::vector<DecisionTree>(p.n_estimators)};
  const TreeParams tp{p.mode, p.max_features_fraction, p.max_depth, p.min_samples_split};
  parallel_for(p.n_estimators, [&](std::size_t t) {
    Rng rng(p.seed, {0x7EE5, t});
    std::vector<double> w(x.rows(), 1.0);
    if (p.bootstrap) {
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t i = 0; i < x.rows(); ++i) w[rng.below(x.rows())] += 1.0;
    }
    model.trees[t] = tree_detail::Builder(cols, y, w, n_classes, tp, rng).build();
  });
  return model;
}

struct ForestPrediction {
  std::vector<int> labels;
  Matrix proba;
};

/// Averages the trees' normalized leaf distributions; argmax ties go to the
/// lowest class index.
inline ForestPrediction predict_forest(const ForestModel& model, const Matrix& x) {
  require(x.cols() == model.n_features, "feature dimension mismatch: model expects " +
                                            std::to_string(model.n_features) + ", got " + std::to_string(x.cols()));
  ForestPrediction out{std::vector<int>(x.rows()), Matrix(x.rows(), model.n_classes)};
  parallel_for(x.rows(), [&](std::size_t r) {
    auto p = out.proba.row(r);
    const auto row = x.row(r);
    for (const auto& tree : model.trees) {
      const auto& leaf = tree.leaf_for(row);
      const auto c = tree.counts(leaf);
      const double inv = 1.0 / leaf.weight;
      for (std::size_t k = 0; k < model.n_classes; ++k) p[k] += c[k] * inv;
    }
    const double inv_t = 1.0 / static_cast<double>(model.trees.size());
    for (auto& v : p) v *= inv_t;
    out.labels[r] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  });
  return out;
}

struct Importance {
  std::vector<double> mean;  // sums to 1
  std::vector<double> std;   // spread over trees
};

/// Mean decrease in Gini impurity per feature. Each split contributes
/// w_node * g_node - w_left * g_left - w_right * g_right; per-tree vectors are
/// normalized to sum 1 and averaged over the trees that have any positive
/// decrease.
inline Importance gini_importance(const ForestModel& model) {
  const std::size_t d = model.n_features;
  std::vector<std::vector<double>> per_tree;
  for (const auto& tree : model.trees) {
    std::vector<double> imp(d, 0.0);
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) continue;
      const auto& l = tree.nodes[static_cast<std::size_t>(n.left)];
      const auto& r = tree.nodes[static_cast<std::size_t>(n.right)];
      const double dec = n.weight * n.impurity - l.weight * l.impurity - r.weight * r.impurity;
      imp[static_cast<std::size_t>(n.feature)] += std::max(0.0, dec);
    }
    double s = 0.0;
    for (double v : imp) s += v;
    if (!(s > 0.0)) continue;
    for (auto& v : imp) v /= s;
    per_tree.push_back(std::move(imp));
  }
  if (per_tree.empty()) throw ValidationError("gini importance undefined: no tree has an impurity-reducing split");
  Importance out{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  const double t = static_cast<double>(per_tree.size());
  for (const auto& v : per_tree)
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += v[j];
  for (auto& v : out.mean) v /= t;
  for (const auto& v : per_tree)
    for (std::size_t j = 0; j < d; ++j) out.std[j] += (v[j] - out.mean[j]) * (v[j] - out.mean[j]);
  for (auto& v : out.std) v = std::sqrt(v / t);
  return out;
}

}  // namespace sarc
