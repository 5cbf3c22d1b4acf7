#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "sarc/classifiers.hpp"
#include "sarc/crnn.hpp"
#include "sarc/features.hpp"
#include "sarc/select.hpp"
#include "sarc/trees.hpp"

namespace sarc {

enum class Protocol : std::uint8_t { TEMPORAL, SUBJECT };

inline std::string_view to_string(Protocol p) noexcept { return p == Protocol::TEMPORAL ? "temporal" : "subject"; }

inline Protocol parse_protocol(std::string_view s) {
  if (s == "temporal" || s == "TEMPORAL") return Protocol::TEMPORAL;
  if (s == "subject" || s == "SUBJECT") return Protocol::SUBJECT;
  throw ValidationError("unknown protocol '" + std::string(s) + "' (expected temporal or subject)");
}

// ---------------------------------------------------------------------------
// Fold plans
// ---------------------------------------------------------------------------

struct FoldPlan {
  Protocol kind = Protocol::TEMPORAL;
  std::vector<std::vector<std::size_t>> folds;       // window indices, ascending
  std::vector<std::vector<std::string>> subjects;    // SUBJECT: per-fold subject ids
  std::vector<std::vector<Interval>> blocks;         // TEMPORAL: per-source block bounds
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return folds.size(); }
  /// Fold of every window index.
  std::vector<int> assignment(std::size_t n_windows) const {
    std::vector<int> a(n_windows, -1);
    for (std::size_t f = 0; f < folds.size(); ++f)
      for (auto i : folds[f]) a[i] = static_cast<int>(f);
    return a;
  }
};

/// Windows from segment_blocks(); fold i holds the windows cut from block i.
inline FoldPlan plan_temporal_folds(const WindowTensor& wt, std::size_t k = 5) {
  require(k >= 2, "need at least 2 folds");
  FoldPlan plan;
  plan.kind = Protocol::TEMPORAL;
  plan.folds.resize(k);
  plan.blocks.resize(wt.sources.size());
  std::vector<bool> wholesale(wt.sources.size(), false);
  for (std::size_t s = 0; s < wt.sources.size(); ++s) {
    const auto bb = block_bounds(wt.sources[s].interval, k);
    wholesale[s] = std::any_of(bb.begin(), bb.end(), [&](const Interval& b) { return b.size() < wt.length; });
    plan.blocks[s] = wholesale[s] ? std::vector<Interval>{wt.sources[s].interval} : bb;
    if (wholesale[s])
      plan.warnings.push_back("recording " + wt.sources[s].recording_id + " is too short for " + std::to_string(k) +
                              " blocks; assigned to fold " + std::to_string(s % k));
  }
  for (std::size_t i = 0; i < wt.size(); ++i) {
    const int b = wt.meta[i].block;
    if (b < 0 || static_cast<std::size_t>(b) >= k)
      throw ValidationError("temporal plan needs windows cut within " + std::to_string(k) + " blocks");
    plan.folds[static_cast<std::size_t>(b)].push_back(i);
  }
  return plan;
}

/// Distinct subjects in source order of first appearance, then sorted.
inline std::vector<std::string> subject_list(const WindowTensor& wt) {
  std::set<std::string> s;
  for (const auto& src : wt.sources) s.insert(src.subject_id);
  return {s.begin(), s.end()};
}

/// Seeded shuffle of the sorted subject list, then round-robin into k groups.
inline std::vector<std::vector<std::string>> subject_groups(std::vector<std::string> subjects, std::size_t k,
                                                            std::uint64_t seed) {
  if (subjects.size() < k)
    throw ValidationError("subject protocol needs at least " + std::to_string(k) + " subjects, found " +
                          std::to_string(subjects.size()));
  std::sort(subjects.begin(), subjects.end());
  Rng rng(seed, {0x5B1EC7});
  for (std::size_t i = subjects.size(); i > 1; --i) std::swap(subjects[i - 1], subjects[rng.below(i)]);
  std::vector<std::vector<std::string>> groups(k);
  for (std::size_t i = 0; i < subjects.size(); ++i) groups[i % k].push_back(subjects[i]);
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

inline FoldPlan plan_subject_folds(const WindowTensor& wt, std::size_t k = 5, std::uint64_t seed = 0) {
  require(k >= 2, "need at least 2 folds");
  FoldPlan plan;
  plan.kind = Protocol::SUBJECT;
  plan.subjects = subject_groups(subject_list(wt), k, seed);
  std::map<std::string, std::size_t> group_of;
  for (std::size_t g = 0; g < k; ++g)
    for (const auto& s : plan.subjects[g]) group_of[s] = g;
  plan.folds.resize(k);
  for (std::size_t i = 0; i < wt.size(); ++i) plan.folds[group_of.at(wt.source_of(i).subject_id)].push_back(i);
  return plan;
}

/// Checks partition and protocol-specific separation; throws on violation.
inline void validate_plan(const FoldPlan& plan, const WindowTensor& wt) {
  const auto a = plan.assignment(wt.size());
  std::size_t total = 0;
  for (const auto& f : plan.folds) total += f.size();
  if (total != wt.size() || std::find(a.begin(), a.end(), -1) != a.end())
    throw Error(ErrorClass::Internal, "fold plan does not partition the window set");
  if (plan.kind == Protocol::SUBJECT) {
    std::map<std::string, int> fold_of;
    for (std::size_t i = 0; i < wt.size(); ++i) {
      auto [it, ins] = fold_of.try_emplace(wt.source_of(i).subject_id, a[i]);
      if (!ins && it->second != a[i])
        throw Error(ErrorClass::Internal, "subject " + it->first + " appears in more than one fold");
    }
    return;
  }
  // Per source: sweep windows by start, tracking the furthest end reached by each fold.
  std::vector<std::vector<std::size_t>> by_source(wt.sources.size());
  for (std::size_t i = 0; i < wt.size(); ++i) by_source[wt.meta[i].source].push_back(i);
  for (auto& ws : by_source) {
    std::sort(ws.begin(), ws.end(), [&](auto x, auto y) { return wt.meta[x].start_sample < wt.meta[y].start_sample; });
    std::vector<std::size_t> reach(plan.size(), 0);
    for (auto i : ws) {
      const std::size_t s = wt.meta[i].start_sample;
      for (std::size_t f = 0; f < plan.size(); ++f)
        if (static_cast<int>(f) != a[i] && reach[f] > s)
          throw Error(ErrorClass::Internal, "temporal folds share samples in " + wt.source_of(i).recording_id);
      reach[static_cast<std::size_t>(a[i])] = std::max(reach[static_cast<std::size_t>(a[i])], s + wt.length);
    }
  }
}

// ---------------------------------------------------------------------------
// Confusion matrix
// ---------------------------------------------------------------------------

using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

/// Rows are true classes, columns predicted classes.
inline Confusion confusion_matrix(std::span<const int> truth, std::span<const int> predicted) {
  require(truth.size() == predicted.size(), "confusion matrix inputs differ in length");
  Confusion c{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < static_cast<int>(kNumClasses) && predicted[i] >= 0 &&
                predicted[i] < static_cast<int>(kNumClasses),
            "class index out of range");
    ++c[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return c;
}

inline double confusion_accuracy(const Confusion& c) {
  std::size_t tr = 0, total = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i)
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      total += c[i][j];
      if (i == j) tr += c[i][j];
    }
  return total ? static_cast<double>(tr) / static_cast<double>(total) : 0.0;
}

inline std::array<std::array<double, kNumClasses>, kNumClasses> normalize_rows(const Confusion& c) {
  std::array<std::array<double, kNumClasses>, kNumClasses> out{};
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    std::size_t s = 0;
    for (auto v : c[i]) s += v;
    for (std::size_t j = 0; j < kNumClasses; ++j)
      out[i][j] = s ? static_cast<double>(c[i][j]) / static_cast<double>(s) : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// LDA embedding
// ---------------------------------------------------------------------------

struct LdaResult {
  Matrix directions;  // d x components, unit-norm columns
  Matrix embedding;   // N x components, centered by the global mean
  std::vector<double> eigenvalues;
};

/// Solves S_b v = lambda (S_w + eps I) v with eps = 1e-6 trace(S_w) / d.
inline LdaResult lda_embed(const Matrix& x, std::span<const int> labels, std::size_t components = 2) {
  require(labels.size() == x.rows(), "label count does not match row count");
  const std::size_t n = x.rows(), d = x.cols();
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels[i]].push_back(i);
  if (groups.size() < 2) throw ValidationError("LDA needs at least 2 classes");
  require(components >= 1 && components <= d, "LDA component count out of range");
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mu[static_cast<Eigen::Index>(j)] += x(i, j);
  mu /= static_cast<double>(n);
  const auto di = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(di, di), sb = Eigen::MatrixXd::Zero(di, di);
  Eigen::VectorXd v(di);
  for (const auto& [cls, rows] : groups) {
    Eigen::VectorXd mc = Eigen::VectorXd::Zero(di);
    for (auto r : rows)
      for (std::size_t j = 0; j < d; ++j) mc[static_cast<Eigen::Index>(j)] += x(r, j);
    mc /= static_cast<double>(rows.size());
    for (auto r : rows) {
      for (std::size_t j = 0; j < d; ++j) v[static_cast<Eigen::Index>(j)] = x(r, j) - mc[static_cast<Eigen::Index>(j)];
      sw.selfadjointView<Eigen::Lower>().rankUpdate(v);
    }
    const Eigen::VectorXd dm = mc - mu;
    sb.noalias() += static_cast<double>(rows.size()) * dm * dm.transpose();
  }
  sw = sw.selfadjointView<Eigen::Lower>();
  const double eps = 1e-6 * std::max(sw.trace(), 1e-300) / static_cast<double>(d);
  sw.diagonal().array() += eps;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sb, sw);
  if (solver.info() != Eigen::Success) throw ConvergenceError("LDA generalized eigenproblem failed");
  LdaResult out{Matrix(d, components), Matrix(n, components), {}};
  for (std::size_t c = 0; c < components; ++c) {
    const Eigen::Index col = di - 1 - static_cast<Eigen::Index>(c);  // eigenvalues ascend
    Eigen::VectorXd w = solver.eigenvectors().col(col);
    w.normalize();
    Eigen::Index arg = 0;
    w.cwiseAbs().maxCoeff(&arg);
    if (w[arg] < 0) w = -w;
    out.eigenvalues.push_back(solver.eigenvalues()[col]);
    for (std::size_t j = 0; j < d; ++j) out.directions(j, c) = w[static_cast<Eigen::Index>(j)];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < components; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (x(i, j) - mu[static_cast<Eigen::Index>(j)]) * out.directions(j, c);
      out.embedding(i, c) = s;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct ClassifierSpec {
  std::string name;
  ClassifierKind kind = ClassifierKind::RF;
  ForestParams rf;
  std::size_t k = 1;
  SvcParams svc;
  CrnnConfig crnn;

  static ClassifierSpec random_forest(std::size_t trees = 150, double max_features = 0.10, std::uint64_t seed = 0) {
    ClassifierSpec s{"RF", ClassifierKind::RF, {}, 1, {}, {}};
    s.rf.n_estimators = trees;
    s.rf.max_features_fraction = max_features;
    s.rf.seed = seed;
    return s;
  }
  static ClassifierSpec knn(std::size_t k) {
    return ClassifierSpec{"k-NN(k=" + std::to_string(k) + ")", ClassifierKind::KNN, {}, k, {}, {}};
  }
  static ClassifierSpec svc_rbf(double gamma = 0.005, double c = 1.0) {
    ClassifierSpec s{"SVC", ClassifierKind::SVC, {}, 1, {}, {}};
    s.svc.gamma = gamma;
    s.svc.C = c;
    return s;
  }
  static ClassifierSpec crnn_default(std::uint64_t seed = 0) {
    ClassifierSpec s{"CRNN", ClassifierKind::CRNN, {}, 1, {}, {}};
    s.crnn.seed = seed;
    return s;
  }
};

struct PipelineSpec {
  std::vector<ClassifierSpec> classifiers;
  double feature_fraction = 0.75;
  bool global_ranking = false;  // rank once on all training-tensor rows instead of per fold
  RankParams rank;
  std::size_t train_accuracy_rows = 2000;  // 0: score every training row
};

/// Features (and optionally raw windows) for one protocol, with matching
/// fold plans over the training-overlap and validation-overlap tensors.
struct ProtocolData {
  Protocol protocol = Protocol::TEMPORAL;
  WindowTensor train_windows, valid_windows;  // raw data, kept only when needed
  FeatureMatrix train, valid;
  FoldPlan train_plan, valid_plan;
};

struct ProtocolOptions {
  SegmentationSpec segmentation;       // training windows
  double validation_overlap = 0.0;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  bool keep_windows = false;
  bool features = true;
};

inline ProtocolData prepare_protocol(std::span<const Recording> recs, Protocol protocol, const ProtocolOptions& o) {
  ProtocolData pd;
  pd.protocol = protocol;
  SegmentationSpec vs = o.segmentation;
  vs.overlap_fraction = o.validation_overlap;
  WindowTensor tw, vw;
  if (protocol == Protocol::TEMPORAL) {
    tw = segment_blocks(recs, o.segmentation, o.folds);
    vw = segment_blocks(recs, vs, o.folds);
    pd.train_plan = plan_temporal_folds(tw, o.folds);
    pd.valid_plan = plan_temporal_folds(vw, o.folds);
  } else {
    tw = segment(recs, o.segmentation);
    vw = segment(recs, vs);
    pd.train_plan = plan_subject_folds(tw, o.folds, o.seed);
    pd.valid_plan = plan_subject_folds(vw, o.folds, o.seed);
  }
  validate_plan(pd.train_plan, tw);
  validate_plan(pd.valid_plan, vw);
  if (o.features) {
    pd.train = extract_features(tw);
    pd.valid = extract_features(vw);
  } else {
    pd.train.labels = tw.labels;
    pd.valid.labels = vw.labels;
  }
  if (o.keep_windows) {
    pd.train_windows = std::move(tw);
    pd.valid_windows = std::move(vw);
  }
  return pd;
}

struct ClassifierResult {
  std::string name;
  ClassifierKind kind = ClassifierKind::RF;
  std::vector<double> train_accuracy, valid_accuracy;  // per fold
  std::vector<double> train_seconds, score_seconds;    // per fold
  Confusion confusion{};                               // validation predictions summed over folds
  std::vector<std::string> warnings;
};

struct FoldArtifacts {
  ScalingStats scaling;
  std::optional<FeatureMask> mask;
};

struct ProtocolResult {
  Protocol protocol = Protocol::TEMPORAL;
  std::size_t train_windows = 0, valid_windows = 0, selected_features = 0;
  std::vector<std::vector<std::string>> fold_subjects;
  std::vector<ClassifierResult> classifiers;
  std::vector<FoldArtifacts> folds;  // not serialized
  std::vector<std::string> warnings;
};

struct MeanStd {
  double mean = 0.0, std = 0.0;
};

inline MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) return {};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

namespace eval_detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::max(1e-9, std::chrono::duration<double>(Clock::now() - t0).count());
}

inline std::vector<int> indices_of(std::span<const ExerciseClass> labels, std::span<const std::size_t> rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(static_cast<int>(labels[r]));
  return y;
}

inline double accuracy(std::span<const int> truth, std::span<const int> pred) {
  if (truth.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += truth[i] == pred[i];
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

/// Evenly spaced positions into [0, n), at most m of them.
inline std::vector<std::size_t> spaced(std::size_t n, std::size_t m) {
  std::vector<std::size_t> out;
  if (m == 0 || m >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  for (std::size_t j = 0; j < m; ++j) out.push_back(j * n / m);
  return out;
}

inline std::vector<std::size_t> training_rows(const FoldPlan& plan, std::size_t fold) {
  std::vector<std::size_t> rows;
  for (std::size_t f = 0; f < plan.size(); ++f)
    if (f != fold) rows.insert(rows.end(), plan.folds[f].begin(), plan.folds[f].end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

inline std::vector<std::string> missing_classes(std::span<const int> y) {
  std::array<bool, kNumClasses> seen{};
  for (int v : y) seen[static_cast<std::size_t>(v)] = true;
  std::vector<std::string> out;
  for (std::size_t c = 0; c < kNumClasses; ++c)
    if (!seen[c]) out.emplace_back(kClassNames[c]);
  return out;
}

}  // namespace eval_detail

/// Per fold: scaling and feature mask fitted on training rows only, each
/// classifier fitted and scored. k-NN specs share one neighbour search.
inline ProtocolResult cross_validate(const ProtocolData& data, const PipelineSpec& spec) {
  using namespace eval_detail;
  require(!spec.classifiers.empty(), "no classifiers configured");
  const std::size_t k = data.train_plan.size();
  require(k == data.valid_plan.size(), "training and validation plans disagree on fold count");
  ProtocolResult res;
  res.protocol = data.protocol;
  res.train_windows = data.train.labels.size();
  res.valid_windows = data.valid.labels.size();
  res.fold_subjects = data.train_plan.subjects;
  res.warnings = data.train_plan.warnings;
  for (const auto& c : spec.classifiers) res.classifiers.push_back({c.name, c.kind, {}, {}, {}, {}, {}, {}});

  const bool needs_features = std::any_of(spec.classifiers.begin(), spec.classifiers.end(),
                                          [](const auto& c) { return c.kind != ClassifierKind::CRNN; });
  std::size_t kmax = 0;
  for (const auto& c : spec.classifiers)
    if (c.kind == ClassifierKind::KNN) kmax = std::max(kmax, c.k);

  std::optional<FeatureMask> global_mask;
  if (needs_features && spec.global_ranking && spec.feature_fraction < 1.0) {
    std::vector<std::size_t> all(data.train.rows());
    std::iota(all.begin(), all.end(), 0);
    const auto sc = fit_scaling(data.train, all);
    const auto xs = apply_scaling(data.train.values, sc);
    const auto y = indices_of(data.train.labels, all);
    global_mask = make_mask(rank_features(xs, y, all, kNumClasses, spec.rank).importance.mean, spec.feature_fraction);
  }

  for (std::size_t fold = 0; fold < k; ++fold) {
    const auto tr_rows = training_rows(data.train_plan, fold);
    std::vector<std::size_t> va_rows = data.valid_plan.folds[fold];
    std::sort(va_rows.begin(), va_rows.end());
    const auto ytr = indices_of(data.train.labels, tr_rows);
    const auto yva = indices_of(data.valid.labels, va_rows);
    for (const auto& name : missing_classes(ytr))
      res.warnings.push_back("fold " + std::to_string(fold) + ": class " + name + " absent from training rows");
    for (const auto& name : missing_classes(yva))
      res.warnings.push_back("fold " + std::to_string(fold) + ": class " + name + " absent from validation rows");
    const auto sub = spaced(tr_rows.size(), spec.train_accuracy_rows);
    std::vector<int> ysub;
    for (auto s : sub) ysub.push_back(ytr[s]);

    Matrix xtr, xva, xsub;
    FoldArtifacts art;
    if (needs_features) {
      art.scaling = fit_scaling(data.train, tr_rows, static_cast<int>(fold));
      xtr = apply_scaling(data.train.values.select_rows(tr_rows), art.scaling);
      xva = apply_scaling(data.valid.values.select_rows(va_rows), art.scaling);
      if (spec.feature_fraction < 1.0) {
        if (global_mask) {
          art.mask = *global_mask;
        } else {
          std::vector<std::size_t> all(xtr.rows());
          std::iota(all.begin(), all.end(), 0);
          RankParams rp = spec.rank;
          rp.seed = derive_key(spec.rank.seed, {fold});
          art.mask = make_mask(rank_features(xtr, ytr, all, kNumClasses, rp).importance.mean, spec.feature_fraction,
                               static_cast<int>(fold));
        }
        xtr = apply_mask(xtr, *art.mask);
        xva = apply_mask(xva, *art.mask);
      }
      xsub = xtr.select_rows(sub);
      res.selected_features = xtr.cols();
    }

    // Shared neighbour search for every k-NN spec.
    std::vector<std::vector<std::uint32_t>> nn_va, nn_sub;
    double knn_fit_s = 0.0, knn_score_s = 0.0;
    if (kmax > 0) {
      auto t0 = Clock::now();
      const KnnModel km = knn_fit(xtr, ytr, std::min(kmax, xtr.rows()), kNumClasses);
      knn_fit_s = seconds_since(t0);
      t0 = Clock::now();
      nn_va = knn_neighbors(km, xva, km.k);
      knn_score_s = seconds_since(t0);
      nn_sub = knn_neighbors(km, xsub, km.k);
    }

    for (std::size_t ci = 0; ci < spec.classifiers.size(); ++ci) {
      const auto& cs = spec.classifiers[ci];
      auto& out = res.classifiers[ci];
      std::vector<int> ptr, pva;
      double fit_s = 0.0, score_s = 0.0;
      switch (cs.kind) {
        case ClassifierKind::RF: {
          ForestParams fp = cs.rf;
          fp.seed = derive_key(cs.rf.seed, {fold});
          auto t0 = Clock::now();
          const auto model = fit_forest(xtr, ytr, kNumClasses, fp);
          fit_s = seconds_since(t0);
          t0 = Clock::now();
          pva = predict_forest(model, xva).labels;
          score_s = seconds_since(t0);
          ptr = predict_forest(model, xsub).labels;
          break;
        }
        case ClassifierKind::KNN: {
          auto t0 = Clock::now();
          pva = knn_vote(nn_va, ytr, cs.k, kNumClasses);
          score_s = knn_score_s + seconds_since(t0);
          fit_s = knn_fit_s;
          ptr = knn_vote(nn_sub, ytr, cs.k, kNumClasses);
          break;
        }
        case ClassifierKind::SVC: {
          auto t0 = Clock::now();
          const auto model = svc_fit(xtr, ytr, cs.svc);
          fit_s = seconds_since(t0);
          for (const auto& w : model.warnings) out.warnings.push_back("fold " + std::to_string(fold) + ": " + w);
          t0 = Clock::now();
          pva = svc_predict(model, xva);
          score_s = seconds_since(t0);
          ptr = svc_predict(model, xsub);
          break;
        }
        case ClassifierKind::CRNN: {
          if (data.train_windows.size() != data.train.labels.size())
            throw ValidationError("CRNN evaluation needs the raw windows (prepare with keep_windows)");
          CrnnConfig cfg = cs.crnn;
          cfg.seed = derive_key(cs.crnn.seed, {fold});
          const auto xs_tr = crnn_inputs(data.train_windows.subset(tr_rows));
          const auto xs_va = crnn_inputs(data.valid_windows.subset(va_rows));
          auto t0 = Clock::now();
          const auto model = crnn_train(xs_tr, ytr, cfg);
          fit_s = seconds_since(t0);
          t0 = Clock::now();
          pva = crnn_predict(model, xs_va);
          score_s = seconds_since(t0);
          std::vector<Matrix> xs_sub;
          for (auto s : sub) xs_sub.push_back(xs_tr[s]);
          ptr = crnn_predict(model, xs_sub);
          break;
        }
      }
      out.train_accuracy.push_back(accuracy(ysub, ptr));
      out.valid_accuracy.push_back(accuracy(yva, pva));
      out.train_seconds.push_back(fit_s);
      out.score_seconds.push_back(score_s);
      const auto cm = confusion_matrix(yva, pva);
      for (std::size_t i = 0; i < kNumClasses; ++i)
        for (std::size_t j = 0; j < kNumClasses; ++j) out.confusion[i][j] += cm[i][j];
    }
    res.folds.push_back(std::move(art));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis : std::uint8_t { WINDOW_SECONDS, OVERLAP, K, MAX_FEATURES_FRACTION, GAMMA, FEATURE_FRACTION };

inline std::string_view to_string(SweepAxis a) noexcept {
  switch (a) {
    case SweepAxis::WINDOW_SECONDS: return "window_seconds";
    case SweepAxis::OVERLAP: return "overlap";
    case SweepAxis::K: return "k";
    case SweepAxis::MAX_FEATURES_FRACTION: return "max_features_fraction";
    case SweepAxis::GAMMA: return "gamma";
    case SweepAxis::FEATURE_FRACTION: return "feature_fraction";
  }
  return "?";
}

inline SweepAxis parse_sweep_axis(std::string_view s) {
  for (auto a : {SweepAxis::WINDOW_SECONDS, SweepAxis::OVERLAP, SweepAxis::K, SweepAxis::MAX_FEATURES_FRACTION,
                 SweepAxis::GAMMA, SweepAxis::FEATURE_FRACTION})
    if (s == to_string(a)) return a;
  throw ValidationError("unknown sweep axis '" + std::string(s) + "'");
}

struct SweepPoint {
  double value = 0.0;
  double valid_mean = 0.0, valid_std = 0.0;
  double train_mean = 0.0;
};

struct SweepCurve {
  SweepAxis axis = SweepAxis::OVERLAP;
  Protocol protocol = Protocol::TEMPORAL;
  std::string classifier;
  std::vector<SweepPoint> points;
};

/// Re-runs cross-validation for each value of one axis with a single
/// classifier; segmentation axes re-segment the recordings.
inline SweepCurve sweep(std::span<const Recording> recs, const ProtocolOptions& base, Protocol protocol,
                        const PipelineSpec& pipeline, SweepAxis axis, std::span<const double> values) {
  require(!values.empty(), "sweep needs at least one value");
  require(pipeline.classifiers.size() == 1, "sweep runs exactly one classifier");
  SweepCurve curve{axis, protocol, pipeline.classifiers.front().name, {}};
  const bool seg_axis = axis == SweepAxis::WINDOW_SECONDS || axis == SweepAxis::OVERLAP;
  const bool crnn = pipeline.classifiers.front().kind == ClassifierKind::CRNN;
  ProtocolOptions opt = base;
  opt.keep_windows = crnn;
  opt.features = !crnn;
  std::optional<ProtocolData> shared;
  if (!seg_axis) shared = prepare_protocol(recs, protocol, opt);
  for (double v : values) {
    PipelineSpec ps = pipeline;
    auto& c = ps.classifiers.front();
    ProtocolOptions o = opt;
    switch (axis) {
      case SweepAxis::WINDOW_SECONDS: o.segmentation.window_seconds = v; break;
      case SweepAxis::OVERLAP: o.segmentation.overlap_fraction = v; break;
      case SweepAxis::K:
        require(v >= 1 && v == std::floor(v), "k must be a positive integer");
        c.k = static_cast<std::size_t>(v);
        break;
      case SweepAxis::MAX_FEATURES_FRACTION: c.rf.max_features_fraction = v; break;
      case SweepAxis::GAMMA: c.svc.gamma = v; break;
      case SweepAxis::FEATURE_FRACTION: ps.feature_fraction = v; break;
    }
    const auto r = seg_axis ? cross_validate(prepare_protocol(recs, protocol, o), ps) : cross_validate(*shared, ps);
    const auto va = mean_std(r.classifiers.front().valid_accuracy);
    const auto tr = mean_std(r.classifiers.front().train_accuracy);
    curve.points.push_back({v, va.mean, va.std, tr.mean});
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct EvalReport {
  nlohmann::json config;  // echo of the run configuration
  std::vector<ProtocolResult> protocols;
  std::vector<SweepCurve> sweeps;
};

inline nlohmann::json confusion_json(const Confusion& c) {
  nlohmann::json counts = nlohmann::json::array(), norm = nlohmann::json::array();
  const auto n = normalize_rows(c);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    counts.push_back(c[i]);
    norm.push_back(n[i]);
  }
  return {{"classes", kClassNames}, {"counts", counts}, {"normalized", norm}};
}

inline Confusion confusion_from_json(const nlohmann::json& j) {
  Confusion c{};
  const auto& rows = j.at("counts");
  require(rows.size() == kNumClasses, "confusion matrix must be 7 x 7");
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    require(rows[i].size() == kNumClasses, "confusion matrix must be 7 x 7");
    for (std::size_t k = 0; k < kNumClasses; ++k) c[i][k] = rows[i][k].get<std::size_t>();
  }
  return c;
}

/// Deterministic report body; wall times are written by timings_json().
inline nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json j;
  j["format"] = "sarc-eval-report";
  j["version"] = 1;
  j["config"] = r.config;
  nlohmann::json protos = nlohmann::json::array();
  for (const auto& p : r.protocols) {
    nlohmann::json pj{{"protocol", to_string(p.protocol)},
                      {"train_windows", p.train_windows},
                      {"valid_windows", p.valid_windows},
                      {"selected_features", p.selected_features},
                      {"warnings", p.warnings}};
    if (!p.fold_subjects.empty()) pj["fold_subjects"] = p.fold_subjects;
    nlohmann::json cls = nlohmann::json::array();
    for (const auto& c : p.classifiers) {
      const auto tr = mean_std(c.train_accuracy), va = mean_std(c.valid_accuracy);
      cls.push_back({{"name", c.name},
                     {"kind", to_string(c.kind)},
                     {"train_accuracy", {{"mean", tr.mean}, {"std", tr.std}, {"folds", c.train_accuracy}}},
                     {"valid_accuracy", {{"mean", va.mean}, {"std", va.std}, {"folds", c.valid_accuracy}}},
                     {"confusion", confusion_json(c.confusion)},
                     {"warnings", c.warnings}});
    }
    pj["classifiers"] = cls;
    protos.push_back(std::move(pj));
  }
  j["protocols"] = protos;
  nlohmann::json sw = nlohmann::json::array();
  for (const auto& s : r.sweeps) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : s.points)
      pts.push_back({{"value", p.value}, {"valid_mean", p.valid_mean}, {"valid_std", p.valid_std}, {"train_mean", p.train_mean}});
    sw.push_back({{"axis", to_string(s.axis)}, {"protocol", to_string(s.protocol)}, {"classifier", s.classifier}, {"points", pts}});
  }
  j["sweeps"] = sw;
  return j;
}

inline nlohmann::json timings_json(const EvalReport& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : r.protocols)
    for (const auto& c : p.classifiers) {
      const auto ft = mean_std(c.train_seconds), st = mean_std(c.score_seconds);
      j.push_back({{"protocol", to_string(p.protocol)},
                   {"classifier", c.name},
                   {"train_seconds", {{"mean", ft.mean}, {"std", ft.std}, {"folds", c.train_seconds}}},
                   {"score_seconds", {{"mean", st.mean}, {"std", st.std}, {"folds", c.score_seconds}}}});
    }
  return {{"threads", thread_count()}, {"precision", "float64"}, {"timings", j}};
}

/// One row per (protocol, classifier).
inline std::string report_csv(const EvalReport& r) {
  std::string out = "protocol,classifier,train_mean,train_std,valid_mean,valid_std,train_seconds,score_seconds\n";
  for (const auto& p : r.protocols)
    for (const auto& c : p.classifiers) {
      const auto tr = mean_std(c.train_accuracy), va = mean_std(c.valid_accuracy);
      out += std::string(to_string(p.protocol)) + "," + c.name;
      for (double v : {tr.mean, tr.std, va.mean, va.std, mean_std(c.train_seconds).mean, mean_std(c.score_seconds).mean}) {
        out += ',';
        append_decimal9(out, v);
      }
      out += '\n';
    }
  return out;
}

inline std::string sweep_csv(const SweepCurve& s) {
  std::string out = std::string(to_string(s.axis)) + ",valid_mean,valid_std,train_mean\n";
  for (const auto& p : s.points) {
    bool first = true;
    for (double v : {p.value, p.valid_mean, p.valid_std, p.train_mean}) {
      if (!first) out += ',';
      first = false;
      append_decimal9(out, v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace sarc
