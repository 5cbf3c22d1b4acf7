#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sarc/classifiers.hpp"
#include "sarc/crnn.hpp"
#include "sarc/features.hpp"
#include "sarc/select.hpp"
#include "sarc/trees.hpp"

namespace sarc {

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + p.string());
  return s;
}

/// Writes through a temporary sibling and renames, so readers never see a partial file.
inline void write_file(const std::filesystem::path& p, std::string_view bytes) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  const auto tmp = std::filesystem::path(p.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + p.string());
  }
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + p.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Little-endian byte streams
// ---------------------------------------------------------------------------

namespace bin {

template <class T>
T to_le(T v) noexcept {
  if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
    return v;
  } else {
    auto b = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(b.begin(), b.end());
    return std::bit_cast<T>(b);
  }
}

class Writer {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const T le = to_le(v);
    const auto* p = reinterpret_cast<const char*>(&le);
    buf_.append(p, sizeof(T));
  }
  void u8(std::uint8_t v) { put(v); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void i32(std::int32_t v) { put(v); }
  void f32(float v) { put(v); }
  void f64(double v) { put(v); }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
  }
  void f64s(std::span<const double> v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void raw(std::string_view s) { buf_.append(s); }
  const std::string& bytes() const noexcept { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data, std::string what = "container") : data_(data), what_(std::move(what)) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_le(v);
  }
  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  std::int32_t i32() { return get<std::int32_t>(); }
  float f32() { return get<float>(); }
  double f64() { return get<double>(); }
  std::size_t size(std::size_t elem_bytes = 1) {
    const auto n = u64();
    if (elem_bytes && n > (data_.size() - pos_) / elem_bytes) fail("length field exceeds remaining bytes");
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    const auto n = size();
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> f64s() {
    std::vector<double> v(size(8));
    for (auto& x : v) x = f64();
    return v;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const noexcept { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& msg) const { throw ValidationError("corrupt " + what_ + ": " + msg); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail("unexpected end of data");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

inline void expect_magic(Reader& r, std::string_view magic, std::uint32_t version) {
  if (r.raw(magic.size()) != magic) r.fail("bad magic (expected " + std::string(magic) + ")");
  const auto v = r.u32();
  if (v != version) r.fail("unsupported version " + std::to_string(v));
}

}  // namespace bin

// ---------------------------------------------------------------------------
// Window tensor: float32 container plus JSON sidecar
// ---------------------------------------------------------------------------

inline constexpr std::string_view kWindowMagic = "SARCWIN\1";

inline std::string windows_container(const WindowTensor& wt) {
  bin::Writer w;
  w.raw(kWindowMagic);
  w.u32(1);
  w.u64(wt.size());
  w.u64(wt.length);
  w.u32(kNumChannels);
  for (auto c : kChannelNames) w.str(c);
  for (double v : wt.data) w.f32(static_cast<float>(v));
  return w.bytes();
}

inline nlohmann::json windows_sidecar(const WindowTensor& wt, const SegmentationSpec& spec) {
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& s : wt.sources)
    sources.push_back({{"recording", s.recording_id},
                       {"subject", s.subject_id},
                       {"exercise", to_string(s.exercise)},
                       {"side", to_string(s.side)},
                       {"interval", {s.interval.start, s.interval.end}}});
  std::vector<std::string> labels;
  std::vector<std::size_t> source, start;
  std::vector<int> block;
  for (std::size_t i = 0; i < wt.size(); ++i) {
    labels.emplace_back(to_string(wt.labels[i]));
    source.push_back(wt.meta[i].source);
    start.push_back(wt.meta[i].start_sample);
    block.push_back(wt.meta[i].block);
  }
  return {{"format", "sarc-windows"},
          {"version", 1},
          {"length", wt.length},
          {"window_seconds", spec.window_seconds},
          {"overlap", spec.overlap_fraction},
          {"fs_hz", spec.fs_hz},
          {"channels", kChannelNames},
          {"sources", sources},
          {"labels", labels},
          {"source", source},
          {"start", start},
          {"block", block}};
}

inline WindowTensor load_windows(std::string_view container, const nlohmann::json& sidecar) {
  bin::Reader r(container, "window container");
  bin::expect_magic(r, kWindowMagic, 1);
  WindowTensor wt;
  const auto n = r.u64();
  wt.length = static_cast<std::size_t>(r.u64());
  if (r.u32() != kNumChannels) r.fail("expected 6 channels");
  for (auto c : kChannelNames)
    if (r.str() != c) r.fail("unexpected channel order");
  if (wt.length && n > container.size() / (wt.length * kNumChannels * 4)) r.fail("window count exceeds data size");
  wt.data.resize(static_cast<std::size_t>(n) * wt.length * kNumChannels);
  for (auto& v : wt.data) v = r.f32();
  if (!r.done()) r.fail("trailing bytes");
  try {
    for (const auto& s : sidecar.at("sources")) {
      WindowSource src;
      src.recording_id = s.at("recording").get<std::string>();
      src.subject_id = s.at("subject").get<std::string>();
      auto ex = parse_exercise(s.at("exercise").get<std::string>());
      auto sd = parse_side(s.at("side").get<std::string>());
      if (!ex || !sd) throw ValidationError("window sidecar has an unknown class or side");
      src.exercise = *ex;
      src.side = *sd;
      src.interval = {s.at("interval").at(0).get<std::size_t>(), s.at("interval").at(1).get<std::size_t>()};
      wt.sources.push_back(std::move(src));
    }
    const auto& labels = sidecar.at("labels");
    const auto& source = sidecar.at("source");
    const auto& start = sidecar.at("start");
    const auto& block = sidecar.at("block");
    if (labels.size() != n || source.size() != n || start.size() != n || block.size() != n)
      throw ValidationError("window sidecar does not match the container (" + std::to_string(n) + " windows)");
    if (sidecar.at("length").get<std::size_t>() != wt.length) throw ValidationError("window sidecar length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      auto ex = parse_exercise(labels[i].get<std::string>());
      if (!ex) throw ValidationError("window sidecar has an unknown label");
      wt.labels.push_back(*ex);
      const auto s = source[i].get<std::size_t>();
      if (s >= wt.sources.size()) throw ValidationError("window sidecar source index out of range");
      wt.meta.push_back({s, start[i].get<std::size_t>(), block[i].get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed window sidecar: ") + e.what());
  }
  return wt;
}

inline SegmentationSpec sidecar_spec(const nlohmann::json& sidecar) {
  SegmentationSpec s;
  s.window_seconds = sidecar.at("window_seconds").get<double>();
  s.overlap_fraction = sidecar.at("overlap").get<double>();
  s.fs_hz = sidecar.at("fs_hz").get<double>();
  return s;
}

// ---------------------------------------------------------------------------
// Feature matrix: CSV and binary container
// ---------------------------------------------------------------------------

inline constexpr std::string_view kFeatureMagic = "SARCFEA\1";

inline nlohmann::json feature_metadata(const FeatureMatrix& fm) {
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& s : fm.sources)
    sources.push_back({{"recording", s.recording_id},
                       {"subject", s.subject_id},
                       {"exercise", to_string(s.exercise)},
                       {"side", to_string(s.side)},
                       {"interval", {s.interval.start, s.interval.end}}});
  std::vector<std::string> labels;
  std::vector<std::size_t> source, start;
  std::vector<int> block;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    labels.emplace_back(to_string(fm.labels[i]));
    source.push_back(fm.meta[i].source);
    start.push_back(fm.meta[i].start_sample);
    block.push_back(fm.meta[i].block);
  }
  nlohmann::json j{{"names", fm.names}, {"sources", sources}, {"labels", labels},
                   {"source", source},  {"start", start},     {"block", block}};
  if (fm.scaling)
    j["scaling"] = {{"mean", fm.scaling->mean}, {"std", fm.scaling->std}, {"fold", fm.scaling->fitted_fold}};
  return j;
}

inline std::string features_container(const FeatureMatrix& fm) {
  bin::Writer w;
  w.raw(kFeatureMagic);
  w.u32(1);
  w.u64(fm.rows());
  w.u64(fm.cols());
  w.str(feature_metadata(fm).dump());
  for (double v : fm.values.data()) w.f64(v);
  return w.bytes();
}

inline FeatureMatrix load_features(std::string_view bytes) {
  bin::Reader r(bytes, "feature container");
  bin::expect_magic(r, kFeatureMagic, 1);
  const auto n = static_cast<std::size_t>(r.u64());
  const auto d = static_cast<std::size_t>(r.u64());
  FeatureMatrix fm;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::exception& e) {
    r.fail(std::string("metadata: ") + e.what());
  }
  fm.values = Matrix(n, d);
  for (auto& v : fm.values.data()) v = r.f64();
  if (!r.done()) r.fail("trailing bytes");
  try {
    fm.names = j.at("names").get<std::vector<std::string>>();
    if (fm.names.size() != d) r.fail("name count does not match column count");
    for (const auto& s : j.at("sources")) {
      auto ex = parse_exercise(s.at("exercise").get<std::string>());
      auto sd = parse_side(s.at("side").get<std::string>());
      if (!ex || !sd) r.fail("unknown class or side");
      fm.sources.push_back({s.at("recording").get<std::string>(), s.at("subject").get<std::string>(), *ex, *sd,
                            {s.at("interval").at(0).get<std::size_t>(), s.at("interval").at(1).get<std::size_t>()}});
    }
    const auto& labels = j.at("labels");
    if (labels.size() != n) r.fail("label count does not match row count");
    for (std::size_t i = 0; i < n; ++i) {
      auto ex = parse_exercise(labels[i].get<std::string>());
      if (!ex) r.fail("unknown label");
      fm.labels.push_back(*ex);
      fm.meta.push_back({j.at("source")[i].get<std::size_t>(), j.at("start")[i].get<std::size_t>(), j.at("block")[i].get<int>()});
    }
    if (j.contains("scaling"))
      fm.scaling = ScalingStats{j["scaling"].at("mean").get<std::vector<double>>(),
                                j["scaling"].at("std").get<std::vector<double>>(), j["scaling"].at("fold").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    r.fail(std::string("metadata: ") + e.what());
  }
  return fm;
}

/// Header: label,subject,recording,start,block, then the feature names.
inline std::string features_csv(const FeatureMatrix& fm) {
  std::string out = "label,subject,recording,start,block";
  for (const auto& n : fm.names) out += "," + n;
  out += '\n';
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    const auto& src = fm.sources[fm.meta[i].source];
    out += std::string(to_string(fm.labels[i])) + "," + src.subject_id + "," + src.recording_id + "," +
           std::to_string(fm.meta[i].start_sample) + "," + std::to_string(fm.meta[i].block);
    for (double v : fm.values.row(i)) {
      out += ',';
      append_decimal9(out, v);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

inline constexpr std::string_view kModelMagic = "SARCMDL\1";
inline constexpr std::uint32_t kModelVersion = 1;

/// A trained classifier with the preprocessing it was fitted with.
struct TrainedModel {
  std::variant<ForestModel, KnnModel, SvcModel, CrnnModel> model;
  std::optional<ScalingStats> scaling;
  std::optional<FeatureMask> mask;
  std::vector<std::string> feature_names;  // input columns, before masking

  ClassifierKind kind() const noexcept { return static_cast<ClassifierKind>(model.index()); }
};

namespace model_detail {

inline void put_forest(bin::Writer& w, const ForestModel& m) {
  const auto& p = m.params;
  w.u64(p.n_estimators);
  w.f64(p.max_features_fraction);
  w.u8(p.bootstrap);
  w.u8(static_cast<std::uint8_t>(p.mode));
  w.u64(p.seed);
  w.u64(p.max_depth);
  w.u64(p.min_samples_split);
  w.u64(m.n_classes);
  w.u64(m.n_features);
  w.u64(m.trees.size());
  for (const auto& t : m.trees) {
    w.u64(t.nodes.size());
    for (const auto& n : t.nodes) {
      w.i32(n.feature);
      w.f64(n.threshold);
      w.i32(n.left);
      w.i32(n.right);
      w.f64(n.weight);
      w.f64(n.impurity);
      w.i32(n.value_offset);
    }
    w.f64s(t.leaf_counts);
  }
}

inline ForestModel get_forest(bin::Reader& r) {
  ForestModel m;
  auto& p = m.params;
  p.n_estimators = r.u64();
  p.max_features_fraction = r.f64();
  p.bootstrap = r.u8() != 0;
  p.mode = static_cast<ForestMode>(r.u8());
  p.seed = r.u64();
  p.max_depth = r.u64();
  p.min_samples_split = r.u64();
  m.n_classes = r.u64();
  m.n_features = r.u64();
  m.trees.resize(r.size(8));
  for (auto& t : m.trees) {
    t.n_classes = m.n_classes;
    t.n_features = m.n_features;
    t.nodes.resize(r.size(40));
    for (auto& n : t.nodes) {
      n.feature = r.i32();
      n.threshold = r.f64();
      n.left = r.i32();
      n.right = r.i32();
      n.weight = r.f64();
      n.impurity = r.f64();
      n.value_offset = r.i32();
      const auto nn = static_cast<std::int32_t>(t.nodes.size());
      if (n.feature >= static_cast<std::int32_t>(m.n_features) || n.left >= nn || n.right >= nn ||
          (n.is_leaf() && n.value_offset < 0) || (!n.is_leaf() && (n.left < 0 || n.right < 0)))
        r.fail("tree node out of range");
    }
    t.leaf_counts = r.f64s();
    for (const auto& n : t.nodes)
      if (n.is_leaf() && static_cast<std::size_t>(n.value_offset) + m.n_classes > t.leaf_counts.size())
        r.fail("leaf offset out of range");
  }
  return m;
}

inline void put_matrix(bin::Writer& w, const Matrix& x) {
  w.u64(x.rows());
  w.u64(x.cols());
  for (double v : x.data()) w.f64(v);
}

inline Matrix get_matrix(bin::Reader& r) {
  const auto rows = static_cast<std::size_t>(r.u64());
  const auto cols = static_cast<std::size_t>(r.u64());
  if (cols && rows > (1ull << 40) / cols) r.fail("matrix too large");
  Matrix x(rows, cols);
  for (auto& v : x.data()) v = r.f64();
  return x;
}

inline void put_ints(bin::Writer& w, std::span<const int> v) {
  w.u64(v.size());
  for (int x : v) w.i32(x);
}

inline std::vector<int> get_ints(bin::Reader& r) {
  std::vector<int> v(r.size(4));
  for (auto& x : v) x = r.i32();
  return v;
}

inline void put_svc(bin::Writer& w, const SvcModel& m) {
  w.f64(m.params.C);
  w.f64(m.params.gamma);
  w.f64(m.params.tol);
  w.u64(m.params.max_iter);
  w.f64(m.params.cache_mb);
  put_ints(w, m.classes);
  w.u64(m.n_features);
  put_matrix(w, m.support_vectors);
  w.u64(m.machines.size());
  for (const auto& mc : m.machines) {
    w.i32(mc.positive);
    w.i32(mc.negative);
    w.u64(mc.sv.size());
    for (auto s : mc.sv) w.u32(s);
    w.f64s(mc.coef);
    w.f64(mc.bias);
    w.u64(mc.iterations);
    w.u8(mc.converged);
  }
  w.u64(m.warnings.size());
  for (const auto& s : m.warnings) w.str(s);
}

inline SvcModel get_svc(bin::Reader& r) {
  SvcModel m;
  m.params.C = r.f64();
  m.params.gamma = r.f64();
  m.params.tol = r.f64();
  m.params.max_iter = r.u64();
  m.params.cache_mb = r.f64();
  m.classes = get_ints(r);
  m.n_features = r.u64();
  m.support_vectors = get_matrix(r);
  m.machines.resize(r.size(8));
  for (auto& mc : m.machines) {
    mc.positive = r.i32();
    mc.negative = r.i32();
    mc.sv.resize(r.size(4));
    for (auto& s : mc.sv) {
      s = r.u32();
      if (s >= m.support_vectors.rows()) r.fail("support vector index out of range");
    }
    mc.coef = r.f64s();
    if (mc.coef.size() != mc.sv.size()) r.fail("coefficient count mismatch");
    mc.bias = r.f64();
    mc.iterations = r.u64();
    mc.converged = r.u8() != 0;
  }
  m.warnings.resize(r.size(8));
  for (auto& s : m.warnings) s = r.str();
  return m;
}

inline void put_crnn(bin::Writer& w, CrnnModel m) {
  const auto& c = m.config;
  for (auto v : {c.conv_blocks, c.kernel_size, c.filters, c.pool_size, c.lstm_layers, c.lstm_units, c.n_classes})
    w.u64(v);
  for (auto v : {c.dropout, c.l2, c.adam.lr, c.adam.beta1, c.adam.beta2, c.adam.eps}) w.f64(v);
  w.u64(c.epochs);
  w.u64(c.batch_size);
  w.u64(c.seed);
  w.u64(m.window_length);
  w.u64(m.channels);
  for (auto* p : m.params()) w.f64s(p->value);
  w.u64(m.history.size());
  for (const auto& h : m.history) {
    w.u64(h.epoch);
    w.f64(h.loss);
    w.f64(h.accuracy);
  }
}

inline CrnnModel get_crnn(bin::Reader& r) {
  CrnnConfig c;
  for (auto* v : {&c.conv_blocks, &c.kernel_size, &c.filters, &c.pool_size, &c.lstm_layers, &c.lstm_units, &c.n_classes})
    *v = r.u64();
  for (auto* v : {&c.dropout, &c.l2, &c.adam.lr, &c.adam.beta1, &c.adam.beta2, &c.adam.eps}) *v = r.f64();
  c.epochs = r.u64();
  c.batch_size = r.u64();
  c.seed = r.u64();
  const auto length = static_cast<std::size_t>(r.u64());
  const auto channels = static_cast<std::size_t>(r.u64());
  if (c.filters > 4096 || c.lstm_units > 4096 || c.kernel_size > 4096 || channels > 64 || length > (1u << 24))
    r.fail("implausible network dimensions");
  CrnnModel m = crnn_init(c, length, channels);
  for (auto* p : m.params()) {
    auto v = r.f64s();
    if (v.size() != p->size()) r.fail("parameter tensor shape mismatch");
    p->value = std::move(v);
  }
  m.history.resize(r.size(24));
  for (auto& h : m.history) {
    h.epoch = r.u64();
    h.loss = r.f64();
    h.accuracy = r.f64();
  }
  return m;
}

}  // namespace model_detail

inline std::string model_container(const TrainedModel& tm) {
  using namespace model_detail;
  bin::Writer w;
  w.raw(kModelMagic);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(tm.kind()));
  nlohmann::json meta{{"kind", to_string(tm.kind())}, {"feature_names", tm.feature_names}};
  if (tm.scaling) meta["scaling"] = {{"mean", tm.scaling->mean}, {"std", tm.scaling->std}, {"fold", tm.scaling->fitted_fold}};
  if (tm.mask) {
    std::vector<int> keep(tm.mask->keep.begin(), tm.mask->keep.end());
    meta["mask"] = {{"keep", keep}, {"fraction", tm.mask->fraction}, {"importance", tm.mask->importance},
                    {"fold", tm.mask->fitted_fold}};
  }
  w.str(meta.dump());
  switch (tm.kind()) {
    case ClassifierKind::RF: put_forest(w, std::get<ForestModel>(tm.model)); break;
    case ClassifierKind::KNN: {
      const auto& m = std::get<KnnModel>(tm.model);
      w.u64(m.k);
      w.u64(m.n_classes);
      put_matrix(w, m.x);
      put_ints(w, m.y);
      break;
    }
    case ClassifierKind::SVC: put_svc(w, std::get<SvcModel>(tm.model)); break;
    case ClassifierKind::CRNN: put_crnn(w, std::get<CrnnModel>(tm.model)); break;
  }
  return w.bytes();
}

inline TrainedModel load_model(std::string_view bytes) {
  using namespace model_detail;
  bin::Reader r(bytes, "model container");
  bin::expect_magic(r, kModelMagic, kModelVersion);
  const auto kind = r.u32();
  if (kind > static_cast<std::uint32_t>(ClassifierKind::CRNN)) r.fail("unknown model kind " + std::to_string(kind));
  TrainedModel tm;
  try {
    const auto meta = nlohmann::json::parse(r.str());
    tm.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
    if (meta.contains("scaling"))
      tm.scaling = ScalingStats{meta["scaling"].at("mean").get<std::vector<double>>(),
                                meta["scaling"].at("std").get<std::vector<double>>(), meta["scaling"].at("fold").get<int>()};
    if (meta.contains("mask")) {
      FeatureMask m;
      for (int k : meta["mask"].at("keep").get<std::vector<int>>()) m.keep.push_back(k != 0);
      m.fraction = meta["mask"].at("fraction").get<double>();
      m.importance = meta["mask"].at("importance").get<std::vector<double>>();
      m.fitted_fold = meta["mask"].at("fold").get<int>();
      tm.mask = m;
    }
  } catch (const nlohmann::json::exception& e) {
    r.fail(std::string("metadata: ") + e.what());
  }
  switch (static_cast<ClassifierKind>(kind)) {
    case ClassifierKind::RF: tm.model = get_forest(r); break;
    case ClassifierKind::KNN: {
      KnnModel m;
      m.k = r.u64();
      m.n_classes = r.u64();
      m.x = get_matrix(r);
      m.y = get_ints(r);
      if (m.y.size() != m.x.rows()) r.fail("label count mismatch");
      tm.model = std::move(m);
      break;
    }
    case ClassifierKind::SVC: tm.model = get_svc(r); break;
    case ClassifierKind::CRNN: tm.model = get_crnn(r); break;
  }
  if (!r.done()) r.fail("trailing bytes");
  return tm;
}

}  // namespace sarc
