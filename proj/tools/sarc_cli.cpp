// sarc: command-line front end for the shoulder activity recognition chain.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sarc/sarc.hpp"

namespace fs = std::filesystem;
using namespace sarc;

namespace {

void info(const std::string& s) { std::cerr << s << "\n"; }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("invalid number '" + s + "' for " + what);
}

std::size_t to_count(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw ValidationError("invalid count '" + s + "' for " + what);
  return static_cast<std::size_t>(v);
}

/// rf[:trees[:max_features]] | knn[:k] | svc[:gamma[:C]] | crnn[:epochs]
ClassifierSpec parse_classifier_token(const std::string& token, std::uint64_t seed) {
  const auto parts = split(token, ':');
  if (parts.empty()) throw ValidationError("empty classifier name");
  nlohmann::json j{{"kind", parts[0]}};
  const auto kind = parse_classifier_kind(parts[0]);
  switch (kind) {
    case ClassifierKind::RF:
      if (parts.size() > 1) j["trees"] = to_count(parts[1], "rf trees");
      if (parts.size() > 2) j["max_features"] = to_double(parts[2], "rf max_features");
      break;
    case ClassifierKind::KNN:
      if (parts.size() > 1) j["k"] = to_count(parts[1], "k");
      break;
    case ClassifierKind::SVC:
      if (parts.size() > 1) j["gamma"] = to_double(parts[1], "svc gamma");
      if (parts.size() > 2) j["C"] = to_double(parts[2], "svc C");
      break;
    case ClassifierKind::CRNN:
      if (parts.size() > 1) j["epochs"] = to_count(parts[1], "crnn epochs");
      break;
  }
  return classifier_from_json(j, seed);
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> v;
  for (const auto& p : split(s, ',')) v.push_back(to_double(p, "--values"));
  if (v.empty()) throw ValidationError("--values needs at least one number");
  return v;
}

std::string read_text(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("file not found: " + p.string());
  return read_file(p);
}

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_text(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(p.string() + " is not valid JSON: " + e.what());
  }
}

/// A window tensor stored as <prefix>.bin plus <prefix>.json.
struct WindowFiles {
  fs::path bin, json;
  explicit WindowFiles(const std::string& prefix) {
    fs::path p = prefix;
    if (p.extension() == ".bin" || p.extension() == ".json") p.replace_extension();
    bin = p.string() + ".bin";
    json = p.string() + ".json";
  }
};

WindowTensor read_windows(const std::string& prefix) {
  const WindowFiles f(prefix);
  return load_windows(read_text(f.bin), read_json(f.json));
}

/// Matches a recording by manifest path, with or without the .csv suffix.
bool id_matches(const std::string& id, const std::string& key) {
  if (id == key) return true;
  fs::path p = id;
  return p.extension() == ".csv" && p.replace_extension().generic_string() == key;
}

Interval parse_override(const std::string& s, std::string& id) {
  const auto eq = s.rfind('=');
  const auto colon = s.rfind(':');
  if (eq == std::string::npos || colon == std::string::npos || colon < eq)
    throw ValidationError("override must look like id=start:end, got '" + s + "'");
  id = s.substr(0, eq);
  return Interval{to_count(s.substr(eq + 1, colon - eq - 1), "override start"), to_count(s.substr(colon + 1), "override end")};
}

// ---------------------------------------------------------------------------
// Shared dataset / run flags
// ---------------------------------------------------------------------------

struct RunFlags {
  std::string config, manifest, out, protocol, classifiers;
  bool synth = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> subjects;
  std::optional<double> window_seconds, overlap, validation_overlap, feature_fraction;
  bool global_ranking = false, no_models = false, no_plots = false;

  void add(CLI::App* app, bool with_out = true) {
    app->add_option("--config", config, "run config JSON; flags below override its fields");
    app->add_option("--manifest", manifest, "dataset manifest (recordings are auto-annotated if needed)");
    app->add_flag("--synth", synth, "use the synthetic dataset");
    app->add_option("--subjects", subjects, "synthetic subject count");
    app->add_option("--seed", seed, "run seed (required unless the config has one)");
    app->add_option("--window-seconds", window_seconds, "window length in seconds");
    app->add_option("--overlap", overlap, "training window overlap fraction");
    app->add_option("--validation-overlap", validation_overlap, "validation window overlap fraction");
    app->add_option("--feature-fraction", feature_fraction, "fraction of Gini-ranked features kept");
    app->add_flag("--global-ranking", global_ranking, "rank features once instead of per fold");
    app->add_option("--protocol", protocol, "temporal, subject or both");
    app->add_option("--classifiers", classifiers, "comma list, e.g. rf,knn:1,knn:30,svc:0.005,crnn:30");
    if (with_out) app->add_option("--out", out, "output directory");
  }

  RunConfig build() const {
    RunConfig c;
    if (!config.empty()) {
      const fs::path p = config;
      c = run_config_from_json(read_json(p), p.parent_path());
    }
    if (seed) c.seed = *seed;
    const std::uint64_t s = c.seed.value_or(0);
    if (!manifest.empty()) {
      c.manifest = manifest;
      c.synth.reset();
    }
    if (synth || subjects) {
      if (!c.synth) c.synth = SynthConfig{};
      c.synth->seed = s;
      c.manifest.reset();
    }
    if (c.synth && subjects) c.synth->n_subjects = *subjects;
    if (!c.manifest && !c.synth) {
      c.synth = SynthConfig{};
      c.synth->seed = s;
    }
    if (window_seconds) c.segmentation.window_seconds = *window_seconds;
    if (overlap) c.segmentation.overlap_fraction = *overlap;
    if (validation_overlap) c.validation_overlap = *validation_overlap;
    if (feature_fraction) c.feature_fraction = *feature_fraction;
    if (global_ranking) c.global_ranking = true;
    if (!protocol.empty())
      c.protocols = protocol == "both" ? std::vector{Protocol::TEMPORAL, Protocol::SUBJECT}
                                       : std::vector{parse_protocol(protocol)};
    if (!classifiers.empty()) {
      c.classifiers.clear();
      for (const auto& t : split(classifiers, ',')) c.classifiers.push_back(parse_classifier_token(t, s));
    }
    if (!out.empty()) c.output_dir = out;
    if (no_models) c.save_models = false;
    if (no_plots) c.plots = false;
    return c;
  }
};

void print_summary(const RunOutcome& r, const fs::path& out) {
  std::cout << render_report_table(r.report_json, &r.timings_json);
  for (const auto& p : r.report.protocols)
    for (const auto& w : p.warnings) info("warning (" + std::string(to_string(p.protocol)) + "): " + w);
  std::cout << "wrote " << r.files.size() << " files to " << out.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shoulder exercise activity recognition chain"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads (0: all cores)")->capture_default_str();

  // synth -----------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate the synthetic dataset as CSV files plus a manifest");
  SynthConfig sc;
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed")->required();
  synth->add_option("--subjects", sc.n_subjects, "subject count")->capture_default_str();
  synth->add_option("--reps", sc.reps_per_set, "repetitions per set")->capture_default_str();
  synth->add_option("--period-min", sc.rep_period_min, "shortest rep period [s]")->capture_default_str();
  synth->add_option("--period-max", sc.rep_period_max, "longest rep period [s]")->capture_default_str();
  synth->add_option("--accel-noise", sc.accel_noise_std, "accelerometer noise std [g]")->capture_default_str();
  synth->add_option("--gyro-noise", sc.gyro_noise_std, "gyroscope noise std [rad/s]")->capture_default_str();
  synth->add_option("--shift", sc.subject_shift_strength, "subject shift strength in [0, 1]")->capture_default_str();
  synth->add_option("--rest-padding", sc.rest_padding, "rest before and after each set [s]")->capture_default_str();

  // ingest ----------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "validate every recording of a manifest");
  std::string ingest_manifest, ingest_summary;
  ingest->add_option("--manifest", ingest_manifest, "dataset manifest")->required();
  ingest->add_option("--summary", ingest_summary, "write a per-recording JSON summary");

  // annotate --------------------------------------------------------------
  auto* annotate = app.add_subcommand("annotate", "energy-threshold annotation of the active portion");
  std::string ann_manifest, ann_out, ann_plots;
  double ann_fraction = 0.33, ann_window = 2.0;
  std::vector<std::string> ann_overrides;
  bool ann_force = false;
  annotate->add_option("--manifest", ann_manifest, "input manifest")->required();
  annotate->add_option("--out", ann_out, "annotated manifest to write")->required();
  annotate->add_option("--threshold-fraction", ann_fraction, "threshold as a fraction of peak energy")->capture_default_str();
  annotate->add_option("--window-seconds", ann_window, "moving-average window [s]")->capture_default_str();
  annotate->add_option("--override", ann_overrides, "manual interval, id=start:end (repeatable)");
  annotate->add_flag("--force", ann_force, "re-annotate recordings that already carry an interval");
  annotate->add_option("--plot-dir", ann_plots, "write one SVG per recording");

  // segment ---------------------------------------------------------------
  auto* segment_cmd = app.add_subcommand("segment", "cut annotated recordings into windows");
  std::string seg_manifest, seg_out;
  SegmentationSpec seg_spec;
  std::size_t seg_blocks = 0;
  segment_cmd->add_option("--manifest", seg_manifest, "annotated manifest")->required();
  segment_cmd->add_option("--out", seg_out, "output prefix (<prefix>.bin and <prefix>.json)")->required();
  segment_cmd->add_option("--window-seconds", seg_spec.window_seconds, "window length [s]")->capture_default_str();
  segment_cmd->add_option("--overlap", seg_spec.overlap_fraction, "overlap fraction")->capture_default_str();
  segment_cmd->add_option("--blocks", seg_blocks, "cut within k contiguous time blocks (0: off)");

  // featurize -------------------------------------------------------------
  auto* featurize = app.add_subcommand("featurize", "extract the 133 window features");
  std::string feat_windows, feat_out, feat_format;
  featurize->add_option("--windows", feat_windows, "window prefix from segment")->required();
  featurize->add_option("--out", feat_out, "output file")->required();
  featurize->add_option("--format", feat_format, "csv or bin (default: from the extension)");

  // rank ------------------------------------------------------------------
  auto* rank = app.add_subcommand("rank", "Gini importance ranking with extremely randomized trees");
  std::string rank_features_path, rank_windows, rank_out, rank_plot;
  RankParams rank_params;
  rank->add_option("--features", rank_features_path, "binary feature container");
  rank->add_option("--windows", rank_windows, "window prefix (featurized on the fly)");
  rank->add_option("--out", rank_out, "ranking CSV")->required();
  rank->add_option("--trees", rank_params.n_estimators, "ensemble size")->capture_default_str();
  rank->add_option("--seed", rank_params.seed, "ensemble seed")->required();
  rank->add_option("--plot", rank_plot, "importance bar chart SVG");

  // train -----------------------------------------------------------------
  auto* train = app.add_subcommand("train", "fit one classifier on a window set");
  std::string train_windows, train_out, train_kind, train_history;
  std::uint64_t train_seed = 0;
  double train_fraction = 0.75;
  std::optional<std::size_t> t_trees, t_k, t_epochs, t_batch, t_filters, t_units, t_kernel;
  std::optional<double> t_maxf, t_gamma, t_c, t_lr;
  train->add_option("--windows", train_windows, "window prefix from segment")->required();
  train->add_option("--classifier", train_kind, "rf, knn, svc or crnn")->required();
  train->add_option("--out", train_out, "model container")->required();
  train->add_option("--seed", train_seed, "training seed")->required();
  train->add_option("--feature-fraction", train_fraction, "fraction of ranked features kept")->capture_default_str();
  train->add_option("--trees", t_trees, "rf: tree count");
  train->add_option("--max-features", t_maxf, "rf: max features fraction");
  train->add_option("--k", t_k, "knn: neighbour count");
  train->add_option("--gamma", t_gamma, "svc: RBF gamma");
  train->add_option("--C", t_c, "svc: box constraint");
  train->add_option("--epochs", t_epochs, "crnn: epochs");
  train->add_option("--batch-size", t_batch, "crnn: batch size");
  train->add_option("--filters", t_filters, "crnn: conv filters");
  train->add_option("--units", t_units, "crnn: LSTM units");
  train->add_option("--kernel", t_kernel, "crnn: conv kernel size");
  train->add_option("--lr", t_lr, "crnn: Adam learning rate");
  train->add_option("--history", train_history, "crnn: per-epoch history CSV");

  // evaluate --------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "cross-validate classifiers under one or both protocols");
  RunFlags eval_flags;
  eval_flags.add(evaluate);
  evaluate->add_flag("--no-plots", eval_flags.no_plots, "skip SVG figures");

  // sweep -----------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "accuracy as a function of one parameter");
  RunFlags sweep_flags;
  std::string sweep_axis, sweep_values, sweep_csv_out, sweep_svg;
  sweep_flags.add(sweep_cmd, false);
  sweep_cmd->add_option("--axis", sweep_axis, "window_seconds, overlap, k, max_features_fraction, gamma, feature_fraction")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_cmd->add_option("--out", sweep_csv_out, "curve CSV")->required();
  sweep_cmd->add_option("--svg", sweep_svg, "curve SVG");

  // report ----------------------------------------------------------------
  auto* report = app.add_subcommand("report", "render a stored report as a table and SVG figures");
  std::string rep_path, rep_timings, rep_svg_dir;
  report->add_option("--report", rep_path, "report.json")->required();
  report->add_option("--timings", rep_timings, "timings.json (default: next to the report)");
  report->add_option("--svg-dir", rep_svg_dir, "write confusion and sweep figures here");

  // run -------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "full pipeline from a run config");
  RunFlags run_flags;
  run_flags.add(run);
  run->add_flag("--no-models", run_flags.no_models, "skip fitting final models");
  run->add_flag("--no-plots", run_flags.no_plots, "skip SVG figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorClass::Validation);
  }

  try {
    set_thread_count(threads);

    if (*synth) {
      sc.seed = synth_seed;
      const auto ds = generate_dataset(sc);
      const auto m = write_dataset(synth_out, ds.recordings, sc.fs_hz);
      std::cout << "wrote " << ds.recordings.size() << " recordings and " << m.string() << "\n";
    } else if (*ingest) {
      Manifest m;
      const auto recs = load_recordings(ingest_manifest, &m);
      std::size_t samples = 0, annotated = 0;
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : recs) {
        samples += r.size();
        annotated += r.annotation.has_value();
        rows.push_back({{"id", r.id},
                        {"subject", r.subject_id},
                        {"exercise", to_string(r.exercise)},
                        {"side", to_string(r.side)},
                        {"samples", r.size()},
                        {"duration", r.duration()},
                        {"annotated", r.annotation.has_value()}});
      }
      if (!ingest_summary.empty()) write_file(ingest_summary, rows.dump(2) + "\n");
      std::cout << recs.size() << " recordings, " << samples << " samples, " << annotated << " annotated\n";
    } else if (*annotate) {
      Manifest m;
      auto recs = load_recordings(ann_manifest, &m);
      std::map<std::size_t, Interval> overrides;
      for (const auto& o : ann_overrides) {
        std::string id;
        const auto iv = parse_override(o, id);
        std::size_t hit = recs.size();
        for (std::size_t i = 0; i < recs.size(); ++i)
          if (id_matches(recs[i].id, id)) hit = i;
        if (hit == recs.size()) throw ValidationError("override names unknown recording '" + id + "'");
        overrides[hit] = iv;
      }
      parallel_for(recs.size(), [&](std::size_t i) {
        if (auto it = overrides.find(i); it != overrides.end())
          recs[i] = review_annotation(std::move(recs[i]), it->second);
        else if (ann_force || !recs[i].annotation)
          recs[i] = auto_annotate(std::move(recs[i]), ann_window, ann_fraction);
      });
      const fs::path in_dir = fs::absolute(fs::path(ann_manifest)).parent_path();
      const fs::path out_dir = fs::absolute(fs::path(ann_out)).parent_path();
      for (std::size_t i = 0; i < recs.size(); ++i) {
        m.files[i].annotation = recs[i].annotation;
        m.files[i].path = fs::relative(in_dir / m.files[i].path, out_dir).generic_string();
      }
      write_file(ann_out, to_json(m).dump(2) + "\n");
      if (!ann_plots.empty())
        for (const auto& r : recs) {
          fs::path name = r.id;
          name.replace_extension(".svg");
          write_file(fs::path(ann_plots) / name,
                     svg::annotation(r, energy_profile(r, ann_window), ann_fraction, r.annotation));
        }
      std::cout << "annotated " << recs.size() << " recordings (" << overrides.size() << " overrides) into " << ann_out
                << "\n";
    } else if (*segment_cmd) {
      const auto recs = load_recordings(seg_manifest);
      const auto wt = seg_blocks > 0 ? segment_blocks(recs, seg_spec, seg_blocks) : segment(recs, seg_spec);
      const WindowFiles f(seg_out);
      write_file(f.bin, windows_container(wt));
      write_file(f.json, windows_sidecar(wt, seg_spec).dump(1) + "\n");
      std::cout << wt.size() << " windows of " << wt.length << " samples -> " << f.bin.string() << "\n";
    } else if (*featurize) {
      const auto fm = extract_features(read_windows(feat_windows));
      std::string fmt = feat_format;
      if (fmt.empty()) fmt = fs::path(feat_out).extension() == ".csv" ? "csv" : "bin";
      if (fmt == "csv")
        write_file(feat_out, features_csv(fm));
      else if (fmt == "bin")
        write_file(feat_out, features_container(fm));
      else
        throw ValidationError("unknown feature format '" + fmt + "' (expected csv or bin)");
      std::cout << fm.rows() << " x " << fm.cols() << " features -> " << feat_out << "\n";
    } else if (*rank) {
      if (rank_features_path.empty() == rank_windows.empty())
        throw ValidationError("rank needs exactly one of --features or --windows");
      const FeatureMatrix fm = rank_windows.empty() ? load_features(read_text(rank_features_path))
                                                    : extract_features(read_windows(rank_windows));
      std::vector<std::size_t> all(fm.rows());
      std::iota(all.begin(), all.end(), 0);
      const auto scaled = apply_scaling(fm, fit_scaling(fm, all));
      const auto r = rank_features(scaled, all, rank_params);
      write_file(rank_out, ranking_csv(r));
      if (!rank_plot.empty()) write_file(rank_plot, svg::importance(r));
      std::cout << "ranked " << fm.cols() << " features over " << fm.rows() << " rows -> " << rank_out << "\n";
    } else if (*train) {
      const auto wt = read_windows(train_windows);
      nlohmann::json j{{"kind", train_kind}};
      if (t_trees) j["trees"] = *t_trees;
      if (t_maxf) j["max_features"] = *t_maxf;
      if (t_k) j["k"] = *t_k;
      if (t_gamma) j["gamma"] = *t_gamma;
      if (t_c) j["C"] = *t_c;
      if (t_epochs) j["epochs"] = *t_epochs;
      if (t_batch) j["batch_size"] = *t_batch;
      if (t_filters) j["filters"] = *t_filters;
      if (t_units) j["lstm_units"] = *t_units;
      if (t_kernel) j["kernel_size"] = *t_kernel;
      if (t_lr) j["lr"] = *t_lr;
      const auto spec = classifier_from_json(j, train_seed);
      const auto tm = run_stage("train/" + std::string(to_string(spec.kind)), [&] {
        return train_model(spec, wt, train_fraction, RankParams{250, 0.0, train_seed});
      });
      write_file(train_out, model_container(tm));
      if (const auto* m = std::get_if<CrnnModel>(&tm.model); m && !train_history.empty())
        write_file(train_history, history_csv(m->history));
      const auto pred = predict_model(tm, wt);
      const auto y = class_indices(wt.labels);
      std::size_t ok = 0;
      for (std::size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
      std::printf("%s trained on %zu windows, training accuracy %.4f -> %s\n", spec.name.c_str(), wt.size(),
                  y.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(y.size()), train_out.c_str());
    } else if (*evaluate) {
      RunConfig cfg = eval_flags.build();
      cfg.save_models = false;
      if (cfg.classifiers.empty()) cfg.classifiers = {ClassifierSpec::random_forest(150, 0.10, cfg.seed.value_or(0))};
      if (cfg.output_dir.empty()) throw ValidationError("evaluate needs --out");
      if (threads != 1 && cfg.threads == 1) cfg.threads = threads;
      const auto r = run_pipeline(cfg, info);
      print_summary(r, cfg.output_dir);
    } else if (*sweep_cmd) {
      RunConfig cfg = sweep_flags.build();
      cfg.output_dir = ".";
      cfg.validate();
      SweepRequest req;
      req.axis = parse_sweep_axis(sweep_axis);
      req.values = parse_values(sweep_values);
      req.protocol = cfg.protocols.size() == 1 ? cfg.protocols.front() : Protocol::TEMPORAL;
      if (cfg.classifiers.size() > 1) throw ValidationError("sweep runs exactly one classifier");
      if (!cfg.classifiers.empty()) req.classifier = cfg.classifiers.front();
      req.classifier.rf.seed = *cfg.seed;
      req.classifier.crnn.seed = *cfg.seed;
      set_thread_count(cfg.threads > 1 ? cfg.threads : threads);
      auto recs = run_stage("acquire", [&] {
        return cfg.manifest ? load_recordings(*cfg.manifest) : generate_dataset(*cfg.synth).recordings;
      });
      run_stage("annotate", [&] { annotate_missing(recs, cfg.annotate); });
      PipelineSpec ps;
      ps.classifiers = {req.classifier};
      ps.feature_fraction = cfg.feature_fraction;
      ps.global_ranking = cfg.global_ranking;
      ps.rank = RankParams{cfg.rank_trees, 0.0, *cfg.seed};
      ProtocolOptions po;
      po.segmentation = cfg.segmentation;
      po.validation_overlap = cfg.validation_overlap;
      po.folds = cfg.folds;
      po.seed = *cfg.seed;
      const auto curve = run_stage("sweep/" + sweep_axis, [&] {
        return sarc::sweep(recs, po, req.protocol, ps, req.axis, req.values);
      });
      write_file(sweep_csv_out, sweep_csv(curve));
      if (!sweep_svg.empty()) write_file(sweep_svg, svg::sweep_curve(curve));
      std::cout << sweep_csv(curve);
    } else if (*report) {
      const auto rj = read_json(rep_path);
      fs::path tpath = rep_timings.empty() ? fs::path(rep_path).parent_path() / "timings.json" : fs::path(rep_timings);
      std::optional<nlohmann::json> tj;
      if (fs::exists(tpath)) tj = read_json(tpath);
      else if (!rep_timings.empty()) throw IoError("file not found: " + tpath.string());
      std::cout << run_stage("report", [&] { return render_report_table(rj, tj ? &*tj : nullptr); });
      if (!rep_svg_dir.empty())
        for (const auto& [file, body] : report_figures(rj)) write_file(fs::path(rep_svg_dir) / file, body);
    } else if (*run) {
      RunConfig cfg = run_flags.build();
      if (threads != 1 && cfg.threads == 1) cfg.threads = threads;
      if (cfg.classifiers.empty() && cfg.sweeps.empty()) cfg.classifiers = default_roster(cfg.seed.value_or(0));
      const auto r = run_pipeline(cfg, info);
      print_summary(r, cfg.output_dir);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::Internal);
  }
  return 0;
}
