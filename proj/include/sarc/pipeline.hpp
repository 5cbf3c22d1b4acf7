#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "sarc/annotate.hpp"
#include "sarc/eval.hpp"
#include "sarc/serialize.hpp"
#include "sarc/svg.hpp"
#include "sarc/synth.hpp"

namespace sarc {

inline constexpr std::string_view kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Stage tagging
// ---------------------------------------------------------------------------

/// Runs fn, prefixing any error with the stage name while keeping its class.
template <class Fn>
auto run_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.error_class(), "[" + std::string(stage) + "] " + e.what());
  } catch (const std::bad_alloc&) {
    throw Error(ErrorClass::Internal, "[" + std::string(stage) + "] out of memory");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorClass::Validation, "[" + std::string(stage) + "] " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorClass::Internal, "[" + std::string(stage) + "] " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Dataset loading
// ---------------------------------------------------------------------------

/// Ingests every file of a manifest; paths are relative to the manifest's directory.
inline std::vector<Recording> load_recordings(const std::filesystem::path& manifest_path, Manifest* out = nullptr) {
  if (!std::filesystem::exists(manifest_path)) throw IoError("manifest not found: " + manifest_path.string());
  const Manifest m = load_manifest(read_file(manifest_path));
  const auto base = manifest_path.parent_path();
  std::vector<Recording> recs(m.files.size());
  parallel_for(m.files.size(), [&](std::size_t i) {
    const auto& e = m.files[i];
    const auto text = read_file(base / e.path);
    try {
      recs[i] = ingest_recording(text, e, m.fs_hz);
    } catch (const Error& err) {
      throw Error(err.error_class(), e.path + ": " + err.what());
    }
  });
  if (out) *out = m;
  return recs;
}

/// Writes recordings as CSV files plus a manifest; returns the manifest path.
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, std::span<const Recording> recs,
                                           double fs_hz = kDefaultSampleRateHz) {
  Manifest m;
  m.fs_hz = fs_hz;
  for (const auto& r : recs) {
    ManifestEntry e = manifest_entry(r);
    e.path = std::filesystem::path(r.id).extension() == ".csv" ? r.id : r.id + ".csv";
    write_file(dir / e.path, write_recording_csv(r));
    m.files.push_back(std::move(e));
  }
  write_file(dir / "manifest.json", to_json(m).dump(2) + "\n");
  return dir / "manifest.json";
}

struct AnnotateSpec {
  double window_seconds = 2.0;
  double threshold_fraction = 0.33;
};

/// Auto-annotates recordings that carry no annotation yet.
inline void annotate_missing(std::vector<Recording>& recs, const AnnotateSpec& spec) {
  parallel_for(recs.size(), [&](std::size_t i) {
    if (!recs[i].annotation) recs[i] = auto_annotate(std::move(recs[i]), spec.window_seconds, spec.threshold_fraction);
  });
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct SweepRequest {
  SweepAxis axis = SweepAxis::OVERLAP;
  Protocol protocol = Protocol::TEMPORAL;
  ClassifierSpec classifier = ClassifierSpec::random_forest();
  std::optional<double> feature_fraction;
  std::vector<double> values;
};

struct RunConfig {
  std::optional<std::filesystem::path> manifest;
  std::optional<SynthConfig> synth;
  AnnotateSpec annotate;
  SegmentationSpec segmentation;
  double validation_overlap = 0.0;
  std::size_t folds = 5;
  std::vector<ClassifierSpec> classifiers;
  std::vector<Protocol> protocols{Protocol::TEMPORAL, Protocol::SUBJECT};
  double feature_fraction = 0.75;
  bool global_ranking = false;
  std::size_t rank_trees = 250;
  std::size_t train_accuracy_rows = 2000;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir;
  unsigned threads = 1;
  std::vector<SweepRequest> sweeps;
  bool save_models = true;
  bool plots = true;

  void validate() const {
    require(seed.has_value(), "run config needs an explicit seed");
    require(manifest.has_value() != synth.has_value(), "dataset must name exactly one of manifest or synth");
    require(!classifiers.empty() || !sweeps.empty(), "run config needs at least one classifier or sweep");
    require(!protocols.empty() || classifiers.empty(), "run config needs at least one protocol");
    require(folds >= 2, "folds must be >= 2");
    require(feature_fraction > 0.0 && feature_fraction <= 1.0, "feature_fraction must be in (0, 1]");
    require(validation_overlap >= 0.0 && validation_overlap < 1.0, "validation_overlap must be in [0, 1)");
    require(!output_dir.empty(), "run config needs an output directory");
    segmentation.validate();
    if (synth) synth->validate();
    for (const auto& s : sweeps) require(!s.values.empty(), "sweep over " + std::string(to_string(s.axis)) + " has no values");
  }
};

inline nlohmann::json classifier_json(const ClassifierSpec& c) {
  nlohmann::json j{{"name", c.name}, {"kind", to_string(c.kind)}};
  switch (c.kind) {
    case ClassifierKind::RF:
      j["trees"] = c.rf.n_estimators;
      j["max_features"] = c.rf.max_features_fraction;
      break;
    case ClassifierKind::KNN: j["k"] = c.k; break;
    case ClassifierKind::SVC:
      j["gamma"] = c.svc.gamma;
      j["C"] = c.svc.C;
      j["tol"] = c.svc.tol;
      break;
    case ClassifierKind::CRNN:
      j["conv_blocks"] = c.crnn.conv_blocks;
      j["kernel_size"] = c.crnn.kernel_size;
      j["filters"] = c.crnn.filters;
      j["lstm_layers"] = c.crnn.lstm_layers;
      j["lstm_units"] = c.crnn.lstm_units;
      j["dropout"] = c.crnn.dropout;
      j["l2"] = c.crnn.l2;
      j["lr"] = c.crnn.adam.lr;
      j["epochs"] = c.crnn.epochs;
      j["batch_size"] = c.crnn.batch_size;
      break;
  }
  return j;
}

/// Unset fields keep the defaults; `seed` seeds the stochastic kinds.
inline ClassifierSpec classifier_from_json(const nlohmann::json& j, std::uint64_t seed) {
  const auto kind = parse_classifier_kind(j.at("kind").get<std::string>());
  ClassifierSpec c;
  switch (kind) {
    case ClassifierKind::RF:
      c = ClassifierSpec::random_forest(j.value("trees", std::size_t{150}), j.value("max_features", 0.10), seed);
      require(c.rf.n_estimators >= 1, "rf needs at least one tree");
      require(c.rf.max_features_fraction > 0.0 && c.rf.max_features_fraction <= 1.0, "max_features must be in (0, 1]");
      break;
    case ClassifierKind::KNN:
      c = ClassifierSpec::knn(j.value("k", std::size_t{1}));
      require(c.k >= 1, "k must be >= 1");
      break;
    case ClassifierKind::SVC:
      c = ClassifierSpec::svc_rbf(j.value("gamma", 0.005), j.value("C", 1.0));
      c.svc.tol = j.value("tol", c.svc.tol);
      require(c.svc.gamma > 0.0 && c.svc.C > 0.0, "svc gamma and C must be positive");
      break;
    case ClassifierKind::CRNN: {
      c = ClassifierSpec::crnn_default(seed);
      auto& k = c.crnn;
      k.conv_blocks = j.value("conv_blocks", k.conv_blocks);
      k.kernel_size = j.value("kernel_size", k.kernel_size);
      k.filters = j.value("filters", k.filters);
      k.lstm_layers = j.value("lstm_layers", k.lstm_layers);
      k.lstm_units = j.value("lstm_units", k.lstm_units);
      k.dropout = j.value("dropout", k.dropout);
      k.l2 = j.value("l2", k.l2);
      k.adam.lr = j.value("lr", k.adam.lr);
      k.epochs = j.value("epochs", k.epochs);
      k.batch_size = j.value("batch_size", k.batch_size);
      k.validate();
      break;
    }
  }
  if (j.contains("name")) c.name = j.at("name").get<std::string>();
  return c;
}

inline nlohmann::json synth_json(const SynthConfig& s) {
  return {{"seed", s.seed},
          {"n_subjects", s.n_subjects},
          {"reps_per_set", s.reps_per_set},
          {"rep_period_range", {s.rep_period_min, s.rep_period_max}},
          {"accel_noise_std", s.accel_noise_std},
          {"gyro_noise_std", s.gyro_noise_std},
          {"subject_shift_strength", s.subject_shift_strength},
          {"rep_variability", s.rep_variability},
          {"rest_padding", s.rest_padding},
          {"fs_hz", s.fs_hz}};
}

inline SynthConfig synth_from_json(const nlohmann::json& j, std::uint64_t seed) {
  SynthConfig s;
  s.seed = j.value("seed", seed);
  s.n_subjects = j.value("n_subjects", s.n_subjects);
  s.reps_per_set = j.value("reps_per_set", s.reps_per_set);
  if (j.contains("rep_period_range")) {
    const auto& r = j.at("rep_period_range");
    require(r.is_array() && r.size() == 2, "rep_period_range must be [min, max]");
    s.rep_period_min = r[0].get<double>();
    s.rep_period_max = r[1].get<double>();
  }
  s.accel_noise_std = j.value("accel_noise_std", s.accel_noise_std);
  s.gyro_noise_std = j.value("gyro_noise_std", s.gyro_noise_std);
  s.subject_shift_strength = j.value("subject_shift_strength", s.subject_shift_strength);
  s.rep_variability = j.value("rep_variability", s.rep_variability);
  s.rest_padding = j.value("rest_padding", s.rest_padding);
  s.fs_hz = j.value("fs_hz", s.fs_hz);
  s.validate();
  return s;
}

/// Everything that determines the numeric results. Output location and
/// thread count are left out so reports from different runs compare equal.
inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed.value_or(0);
  if (c.manifest) j["dataset"] = {{"manifest", c.manifest->generic_string()}};
  if (c.synth) j["dataset"] = {{"synth", synth_json(*c.synth)}};
  j["annotate"] = {{"window_seconds", c.annotate.window_seconds}, {"threshold_fraction", c.annotate.threshold_fraction}};
  j["segmentation"] = {{"window_seconds", c.segmentation.window_seconds},
                       {"overlap", c.segmentation.overlap_fraction},
                       {"validation_overlap", c.validation_overlap},
                       {"folds", c.folds}};
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& s : c.classifiers) cls.push_back(classifier_json(s));
  j["classifiers"] = cls;
  nlohmann::json pr = nlohmann::json::array();
  for (auto p : c.protocols) pr.push_back(to_string(p));
  j["protocols"] = pr;
  j["feature_fraction"] = c.feature_fraction;
  j["global_ranking"] = c.global_ranking;
  j["rank_trees"] = c.rank_trees;
  j["train_accuracy_rows"] = c.train_accuracy_rows;
  nlohmann::json sw = nlohmann::json::array();
  for (const auto& s : c.sweeps) {
    nlohmann::json sj{{"axis", to_string(s.axis)},
                      {"protocol", to_string(s.protocol)},
                      {"classifier", classifier_json(s.classifier)},
                      {"values", s.values}};
    if (s.feature_fraction) sj["feature_fraction"] = *s.feature_fraction;
    sw.push_back(std::move(sj));
  }
  j["sweeps"] = sw;
  return j;
}

/// Parses a run config document. Relative manifest and output paths resolve against `base`.
inline RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  require(j.is_object(), "run config root must be an object");
  RunConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    const std::uint64_t seed = c.seed.value_or(0);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      if (d.contains("manifest")) {
        std::filesystem::path p = d.at("manifest").get<std::string>();
        c.manifest = p.is_absolute() || base.empty() ? p : base / p;
      }
      if (d.contains("synth")) c.synth = synth_from_json(d.at("synth"), seed);
    }
    if (j.contains("annotate")) {
      const auto& a = j.at("annotate");
      c.annotate.window_seconds = a.value("window_seconds", c.annotate.window_seconds);
      c.annotate.threshold_fraction = a.value("threshold_fraction", c.annotate.threshold_fraction);
    }
    if (j.contains("segmentation")) {
      const auto& s = j.at("segmentation");
      c.segmentation.window_seconds = s.value("window_seconds", c.segmentation.window_seconds);
      c.segmentation.overlap_fraction = s.value("overlap", c.segmentation.overlap_fraction);
      c.validation_overlap = s.value("validation_overlap", c.validation_overlap);
      c.folds = s.value("folds", c.folds);
    }
    if (j.contains("classifiers"))
      for (const auto& cj : j.at("classifiers")) c.classifiers.push_back(classifier_from_json(cj, seed));
    if (j.contains("protocols")) {
      c.protocols.clear();
      const auto& p = j.at("protocols");
      if (p.is_string()) {
        const auto s = p.get<std::string>();
        if (s == "both")
          c.protocols = {Protocol::TEMPORAL, Protocol::SUBJECT};
        else
          c.protocols = {parse_protocol(s)};
      } else {
        for (const auto& s : p) c.protocols.push_back(parse_protocol(s.get<std::string>()));
      }
    }
    c.feature_fraction = j.value("feature_fraction", c.feature_fraction);
    c.global_ranking = j.value("global_ranking", c.global_ranking);
    c.rank_trees = j.value("rank_trees", c.rank_trees);
    c.train_accuracy_rows = j.value("train_accuracy_rows", c.train_accuracy_rows);
    if (j.contains("output")) {
      std::filesystem::path p = j.at("output").get<std::string>();
      c.output_dir = p.is_absolute() || base.empty() ? p : base / p;
    }
    c.threads = j.value("threads", c.threads);
    c.save_models = j.value("save_models", c.save_models);
    c.plots = j.value("plots", c.plots);
    if (j.contains("sweeps"))
      for (const auto& sj : j.at("sweeps")) {
        SweepRequest s;
        s.axis = parse_sweep_axis(sj.at("axis").get<std::string>());
        s.protocol = parse_protocol(sj.value("protocol", std::string("temporal")));
        if (sj.contains("classifier")) s.classifier = classifier_from_json(sj.at("classifier"), seed);
        if (sj.contains("feature_fraction")) s.feature_fraction = sj.at("feature_fraction").get<double>();
        s.values = sj.at("values").get<std::vector<double>>();
        c.sweeps.push_back(std::move(s));
      }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run config: ") + e.what());
  }
  return c;
}

/// Default roster: the four classifier families with the reference hyperparameters.
inline std::vector<ClassifierSpec> default_roster(std::uint64_t seed) {
  return {ClassifierSpec::random_forest(150, 0.10, seed), ClassifierSpec::knn(1), ClassifierSpec::knn(30),
          ClassifierSpec::svc_rbf(0.005), ClassifierSpec::crnn_default(seed)};
}

// ---------------------------------------------------------------------------
// Single-model training
// ---------------------------------------------------------------------------

/// Fits one classifier on every window: scaling and feature mask are fitted
/// on the same rows, CRNN sees the raw windows.
inline TrainedModel train_model(const ClassifierSpec& spec, const WindowTensor& wt, double feature_fraction = 0.75,
                                const RankParams& rank = {}) {
  TrainedModel tm;
  const auto y = class_indices(wt.labels);
  if (spec.kind == ClassifierKind::CRNN) {
    tm.model = crnn_train(crnn_inputs(wt), y, spec.crnn);
    return tm;
  }
  const auto fm = extract_features(wt);
  std::vector<std::size_t> all(fm.rows());
  std::iota(all.begin(), all.end(), 0);
  tm.feature_names = fm.names;
  tm.scaling = fit_scaling(fm, all);
  Matrix x = apply_scaling(fm.values, *tm.scaling);
  if (feature_fraction < 1.0) {
    tm.mask = make_mask(rank_features(x, y, all, kNumClasses, rank).importance.mean, feature_fraction);
    x = apply_mask(x, *tm.mask);
  }
  switch (spec.kind) {
    case ClassifierKind::RF: tm.model = fit_forest(x, y, kNumClasses, spec.rf); break;
    case ClassifierKind::KNN: tm.model = knn_fit(std::move(x), y, std::min(spec.k, all.size()), kNumClasses); break;
    case ClassifierKind::SVC: tm.model = svc_fit(x, y, spec.svc); break;
    case ClassifierKind::CRNN: break;
  }
  return tm;
}

/// Class indices for windows of the length the model was trained on.
inline std::vector<int> predict_model(const TrainedModel& tm, const WindowTensor& wt) {
  if (const auto* m = std::get_if<CrnnModel>(&tm.model)) {
    if (wt.length != m->window_length)
      throw ShapeError("model expects windows of " + std::to_string(m->window_length) + " samples, got " +
                       std::to_string(wt.length));
    return crnn_predict(*m, crnn_inputs(wt));
  }
  const auto fm = extract_features(wt);
  require(fm.cols() == tm.feature_names.size(), "feature count does not match the model");
  Matrix x = tm.scaling ? apply_scaling(fm.values, *tm.scaling) : fm.values;
  if (tm.mask) x = apply_mask(x, *tm.mask);
  return std::visit(
      [&](const auto& m) -> std::vector<int> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ForestModel>) return predict_forest(m, x).labels;
        else if constexpr (std::is_same_v<M, KnnModel>) return knn_predict(m, x);
        else if constexpr (std::is_same_v<M, SvcModel>) return svc_predict(m, x);
        else return {};
      },
      tm.model);
}

inline std::string history_csv(std::span<const EpochStats> h) {
  std::string out = "epoch,loss,accuracy\n";
  for (const auto& e : h) {
    out += std::to_string(e.epoch) + ",";
    append_decimal9(out, e.loss);
    out += ',';
    append_decimal9(out, e.accuracy);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report rendering from stored JSON
// ---------------------------------------------------------------------------

inline SweepCurve sweep_from_json(const nlohmann::json& j) {
  SweepCurve s;
  s.axis = parse_sweep_axis(j.at("axis").get<std::string>());
  s.protocol = parse_protocol(j.at("protocol").get<std::string>());
  s.classifier = j.at("classifier").get<std::string>();
  for (const auto& p : j.at("points"))
    s.points.push_back({p.at("value").get<double>(), p.at("valid_mean").get<double>(), p.at("valid_std").get<double>(),
                        p.at("train_mean").get<double>()});
  return s;
}

/// File-name-safe form of a classifier name.
inline std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (!out.empty() && out.back() != '_')
      out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

/// SVG figures derived from a report document, keyed by file name.
inline std::vector<std::pair<std::string, std::string>> report_figures(const nlohmann::json& report) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : report.at("protocols")) {
    const auto proto = p.at("protocol").get<std::string>();
    for (const auto& c : p.at("classifiers")) {
      const auto name = c.at("name").get<std::string>();
      out.emplace_back("confusion_" + proto + "_" + slug(name) + ".svg",
                       svg::confusion(confusion_from_json(c.at("confusion")), name + " " + proto + " validation"));
    }
  }
  for (const auto& s : report.at("sweeps")) {
    const auto curve = sweep_from_json(s);
    out.emplace_back("sweep_" + std::string(to_string(curve.axis)) + "_" + std::string(to_string(curve.protocol)) + "_" +
                         slug(curve.classifier) + ".svg",
                     svg::sweep_curve(curve));
  }
  return out;
}

namespace report_detail {

inline std::string pm(const nlohmann::json& stat, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f +/- %.*f", digits, stat.at("mean").get<double>(), digits,
                stat.at("std").get<double>());
  return buf;
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace report_detail

/// Text table with one row per classifier. Training accuracy and timings come
/// from the temporal protocol when present.
inline std::string render_report_table(const nlohmann::json& report, const nlohmann::json* timings = nullptr) {
  using namespace report_detail;
  struct Row {
    std::string name, training = "-", temporal = "-", subject = "-", train_time = "-", score_time = "-";
    bool training_from_temporal = false, time_from_temporal = false;
  };
  std::vector<Row> rows;
  auto row_for = [&](const std::string& name) -> Row& {
    for (auto& r : rows)
      if (r.name == name) return r;
    rows.push_back({name});
    return rows.back();
  };
  for (const auto& p : report.at("protocols")) {
    const bool temporal = p.at("protocol").get<std::string>() == "temporal";
    for (const auto& c : p.at("classifiers")) {
      auto& r = row_for(c.at("name").get<std::string>());
      (temporal ? r.temporal : r.subject) = pm(c.at("valid_accuracy"), 3);
      if (temporal || !r.training_from_temporal) {
        r.training = pm(c.at("train_accuracy"), 3);
        r.training_from_temporal = temporal;
      }
    }
  }
  if (timings)
    for (const auto& t : timings->at("timings")) {
      const bool temporal = t.at("protocol").get<std::string>() == "temporal";
      auto& r = row_for(t.at("classifier").get<std::string>());
      if (temporal || !r.time_from_temporal) {
        r.train_time = pm(t.at("train_seconds"), 2);
        r.score_time = pm(t.at("score_seconds"), 2);
        r.time_from_temporal = temporal;
      }
    }
  const std::vector<std::string> head{"Classifier", "Training", "Temporal Validation", "Subject Validation",
                                      "Train Time [s]", "Score Time [s]"};
  std::vector<std::size_t> w;
  for (const auto& h : head) w.push_back(h.size());
  auto cells = [](const Row& r) {
    return std::vector<std::string>{r.name, r.training, r.temporal, r.subject, r.train_time, r.score_time};
  };
  for (const auto& r : rows) {
    const auto c = cells(r);
    for (std::size_t i = 0; i < c.size(); ++i) w[i] = std::max(w[i], c[i].size());
  }
  auto line = [&](const std::vector<std::string>& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "  " : "") + pad(c[i], w[i]);
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::string out = line(head);
  std::size_t total = 0;
  for (auto x : w) total += x;
  out += std::string(total + 2 * (w.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(cells(r));
  return out;
}

// ---------------------------------------------------------------------------
// Output staging
// ---------------------------------------------------------------------------

/// Collects output files in a sibling staging directory and moves them into
/// place only on commit; an uncommitted stage is deleted on destruction.
class OutputStage {
 public:
  explicit OutputStage(std::filesystem::path out) : out_(std::move(out)) {
    auto name = out_.filename().string();
    if (name.empty()) name = out_.parent_path().filename().string();
    staging_ = out_.parent_path() / ("." + name + ".partial");
    std::error_code ec;
    std::filesystem::remove_all(staging_, ec);
    std::filesystem::create_directories(staging_, ec);
    if (ec) throw IoError("cannot create staging directory " + staging_.string() + ": " + ec.message());
  }
  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;
  ~OutputStage() {
    std::error_code ec;
    std::filesystem::remove_all(staging_, ec);
  }

  void write(const std::string& rel, std::string_view bytes) {
    write_file(staging_ / rel, bytes);
    files_.push_back(rel);
  }
  const std::vector<std::string>& files() const noexcept { return files_; }

  void commit() {
    std::error_code ec;
    for (const auto& rel : files_) {
      const auto dst = out_ / rel;
      std::filesystem::create_directories(dst.parent_path(), ec);
      std::filesystem::rename(staging_ / rel, dst, ec);
      if (ec) throw IoError("cannot move " + rel + " into " + out_.string() + ": " + ec.message());
    }
  }

 private:
  std::filesystem::path out_, staging_;
  std::vector<std::string> files_;
};

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct RunOutcome {
  EvalReport report;
  std::vector<std::string> files;
  nlohmann::json report_json, timings_json;
};

inline nlohmann::json environment_json() {
  return {{"sarc", kVersion},
#if defined(__clang__)
          {"compiler", "clang " __clang_version__},
#elif defined(__GNUC__)
          {"compiler", "gcc " __VERSION__},
#else
          {"compiler", "unknown"},
#endif
          {"cxx_standard", static_cast<long>(__cplusplus)},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"threads", thread_count()},
          {"precision", "float64"}};
}

using ProgressFn = std::function<void(const std::string&)>;

/// Acquisition through evaluation for every configured protocol and sweep,
/// then model fitting on all windows. Writes report.json, timings.json,
/// report.csv, run_manifest.json, SVG figures and model containers.
inline RunOutcome run_pipeline(const RunConfig& cfg, const ProgressFn& progress = {}) {
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  run_stage("config", [&] {
    cfg.validate();
    if (cfg.manifest && !std::filesystem::exists(*cfg.manifest))
      throw IoError("manifest not found: " + cfg.manifest->string());
  });
  set_thread_count(cfg.threads);
  const std::uint64_t seed = *cfg.seed;
  OutputStage out(cfg.output_dir);

  std::vector<Recording> recs = run_stage("acquire", [&] {
    say("acquire");
    if (cfg.manifest) return load_recordings(*cfg.manifest);
    return generate_dataset(*cfg.synth).recordings;
  });
  run_stage("annotate", [&] {
    say("annotate " + std::to_string(recs.size()) + " recordings");
    annotate_missing(recs, cfg.annotate);
  });

  RunOutcome res;
  res.report.config = config_json(cfg);
  PipelineSpec ps;
  ps.classifiers = cfg.classifiers;
  ps.feature_fraction = cfg.feature_fraction;
  ps.global_ranking = cfg.global_ranking;
  ps.rank = RankParams{cfg.rank_trees, 0.0, seed};
  ps.train_accuracy_rows = cfg.train_accuracy_rows;
  ProtocolOptions po;
  po.segmentation = cfg.segmentation;
  po.validation_overlap = cfg.validation_overlap;
  po.folds = cfg.folds;
  po.seed = seed;
  const bool any_crnn = std::any_of(cfg.classifiers.begin(), cfg.classifiers.end(),
                                    [](const auto& c) { return c.kind == ClassifierKind::CRNN; });
  po.keep_windows = any_crnn;

  if (!cfg.classifiers.empty())
    for (auto proto : cfg.protocols) {
      const std::string name(to_string(proto));
      const auto data = run_stage("segment/" + name, [&] {
        say("segment and featurize (" + name + ")");
        return prepare_protocol(recs, proto, po);
      });
      res.report.protocols.push_back(run_stage("evaluate/" + name, [&] {
        say("cross-validate (" + name + ")");
        return cross_validate(data, ps);
      }));
    }

  for (const auto& s : cfg.sweeps) {
    const std::string name = "sweep/" + std::string(to_string(s.axis));
    res.report.sweeps.push_back(run_stage(name, [&] {
      say(name + " (" + std::string(to_string(s.protocol)) + ", " + s.classifier.name + ")");
      PipelineSpec sp = ps;
      sp.classifiers = {s.classifier};
      if (s.feature_fraction) sp.feature_fraction = *s.feature_fraction;
      ProtocolOptions so = po;
      so.keep_windows = false;
      return sweep(recs, so, s.protocol, sp, s.axis, s.values);
    }));
  }

  res.report_json = report_json(res.report);
  res.timings_json = timings_json(res.report);
  run_stage("report", [&] {
    out.write("report.json", res.report_json.dump(2) + "\n");
    out.write("timings.json", res.timings_json.dump(2) + "\n");
    out.write("report.csv", report_csv(res.report));
    for (const auto& s : res.report.sweeps)
      out.write("sweep_" + std::string(to_string(s.axis)) + "_" + std::string(to_string(s.protocol)) + "_" +
                    slug(s.classifier) + ".csv",
                sweep_csv(s));
    if (cfg.plots)
      for (const auto& [file, body] : report_figures(res.report_json)) out.write(file, body);
  });

  if (cfg.save_models && !cfg.classifiers.empty()) {
    const auto wt = run_stage("segment/models", [&] { return segment(recs, cfg.segmentation); });
    for (const auto& c : cfg.classifiers)
      run_stage("train/" + slug(c.name), [&] {
        say("train " + c.name + " on " + std::to_string(wt.size()) + " windows");
        const auto tm = train_model(c, wt, cfg.feature_fraction, ps.rank);
        out.write("models/" + slug(c.name) + ".sarcmdl", model_container(tm));
        if (const auto* m = std::get_if<CrnnModel>(&tm.model)) {
          out.write("models/" + slug(c.name) + "_history.csv", history_csv(m->history));
          if (cfg.plots) out.write("models/" + slug(c.name) + "_history.svg", svg::history(m->history));
        }
      });
  }

  run_stage("report", [&] {
    nlohmann::json files = out.files();
    files.push_back("run_manifest.json");
    nlohmann::json config = res.report.config;
    config["output"] = cfg.output_dir.generic_string();
    config["threads"] = cfg.threads;
    config["save_models"] = cfg.save_models;
    config["plots"] = cfg.plots;
    out.write("run_manifest.json",
              nlohmann::json{{"config", config}, {"environment", environment_json()}, {"files", files}}.dump(2) + "\n");
    out.commit();
  });
  res.files = out.files();
  return res;
}

}  // namespace sarc
