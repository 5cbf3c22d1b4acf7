#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sarc/error.hpp"

namespace sarc {

inline constexpr double kDefaultSampleRateHz = 50.0;
inline constexpr std::size_t kNumChannels = 6;
inline constexpr std::array<std::string_view, kNumChannels> kChannelNames{"ax", "ay", "az", "wx", "wy", "wz"};

// ---------------------------------------------------------------------------
// Exercise classes
// ---------------------------------------------------------------------------

enum class ExerciseClass : std::uint8_t { PEN = 0, ABD, FEL, IR, ER, TRAP, ROW };
inline constexpr std::size_t kNumClasses = 7;
inline constexpr std::array<ExerciseClass, kNumClasses> kAllClasses{
    ExerciseClass::PEN, ExerciseClass::ABD, ExerciseClass::FEL, ExerciseClass::IR,
    ExerciseClass::ER,  ExerciseClass::TRAP, ExerciseClass::ROW};
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{"PEN", "ABD", "FEL", "IR", "ER", "TRAP", "ROW"};

constexpr std::string_view to_string(ExerciseClass c) noexcept { return kClassNames[static_cast<std::size_t>(c)]; }
constexpr int class_index(ExerciseClass c) noexcept { return static_cast<int>(c); }

inline std::optional<ExerciseClass> parse_exercise(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == s) return kAllClasses[i];
  return std::nullopt;
}

enum class Side : std::uint8_t { LEFT = 0, RIGHT = 1 };

constexpr std::string_view to_string(Side s) noexcept { return s == Side::LEFT ? "L" : "R"; }

inline std::optional<Side> parse_side(std::string_view s) noexcept {
  if (s == "L" || s == "LEFT") return Side::LEFT;
  if (s == "R" || s == "RIGHT") return Side::RIGHT;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Samples and recordings
// ---------------------------------------------------------------------------

/// One 6-axis reading. Acceleration in g, angular velocity in rad/s, watch frame.
struct SensorSample {
  double t = 0.0;
  std::array<double, 3> a{};
  std::array<double, 3> w{};

  double channel(std::size_t c) const noexcept { return c < 3 ? a[c] : w[c - 3]; }
  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

/// Half-open sample-index interval [start, end).
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > start ? end - start : 0; }
  bool contains(std::size_t s, std::size_t e) const noexcept { return s >= start && e <= end; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Recording {
  std::string id;
  std::string subject_id;
  ExerciseClass exercise = ExerciseClass::PEN;
  Side side = Side::RIGHT;
  double fs_hz = kDefaultSampleRateHz;
  std::vector<SensorSample> samples;
  std::optional<Interval> annotation;

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
  friend bool operator==(const Recording&, const Recording&) = default;
};

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string path;
  std::string subject;
  ExerciseClass exercise = ExerciseClass::PEN;
  Side side = Side::RIGHT;
  std::optional<Interval> annotation;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  double fs_hz = kDefaultSampleRateHz;
  std::string accel_unit = "g";
  std::string gyro_unit = "rad_s";
  std::vector<ManifestEntry> files;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline nlohmann::json to_json(const Manifest& m) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& e : m.files) {
    nlohmann::json j{{"path", e.path},
                     {"subject", e.subject},
                     {"exercise", std::string(to_string(e.exercise))},
                     {"side", std::string(to_string(e.side))}};
    if (e.annotation) j["annotation"] = {e.annotation->start, e.annotation->end};
    files.push_back(std::move(j));
  }
  return {{"fs_hz", m.fs_hz}, {"units", {{"accel", m.accel_unit}, {"gyro", m.gyro_unit}}}, {"files", files}};
}

/// Parses and validates a manifest document. Units other than g / rad_s are
/// rejected rather than converted.
inline Manifest load_manifest(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "manifest root must be an object");
  Manifest m;
  try {
    m.fs_hz = j.value("fs_hz", kDefaultSampleRateHz);
    if (j.contains("units")) {
      const auto& u = j.at("units");
      m.accel_unit = u.value("accel", std::string("g"));
      m.gyro_unit = u.value("gyro", std::string("rad_s"));
    }
    require(m.fs_hz > 0.0 && std::isfinite(m.fs_hz), "manifest fs_hz must be positive");
    require(m.accel_unit == "g", "unsupported accelerometer unit '" + m.accel_unit + "' (expected g)");
    require(m.gyro_unit == "rad_s", "unsupported gyroscope unit '" + m.gyro_unit + "' (expected rad_s)");
    require(j.contains("files") && j.at("files").is_array(), "manifest needs a 'files' array");
    std::set<std::string> seen;
    for (const auto& f : j.at("files")) {
      ManifestEntry e;
      e.path = f.at("path").get<std::string>();
      e.subject = f.at("subject").get<std::string>();
      const auto ex = f.at("exercise").get<std::string>();
      const auto parsed = parse_exercise(ex);
      require(parsed.has_value(), "unknown exercise class '" + ex + "' for " + e.path);
      e.exercise = *parsed;
      const auto sd = f.at("side").get<std::string>();
      const auto side = parse_side(sd);
      require(side.has_value(), "unknown side '" + sd + "' for " + e.path);
      e.side = *side;
      if (f.contains("annotation") && !f.at("annotation").is_null()) {
        const auto& a = f.at("annotation");
        require(a.is_array() && a.size() == 2, "annotation must be [start, end]");
        e.annotation = Interval{a[0].get<std::size_t>(), a[1].get<std::size_t>()};
        require(e.annotation->start < e.annotation->end, "annotation must be non-empty for " + e.path);
      }
      if (!seen.insert(e.path).second) throw ValidationError("duplicate manifest path: " + e.path);
      m.files.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Sensor CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "t,ax,ay,az,wx,wy,wz";

/// Shortest-roundtrip is not wanted here: values are written with 9 significant digits.
inline void append_decimal9(std::string& out, double v) {
  char buf[48];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  out.append(buf, p);
}

/// Value after a trip through the 9-significant-digit text format.
inline double quantize9(double v) {
  char buf[48];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  double out = 0.0;
  std::from_chars(buf, p, out);
  return out;
}

inline std::string write_recording_csv(const Recording& r) {
  std::string out(kCsvHeader);
  out += '\n';
  out.reserve(out.size() + r.samples.size() * 80);
  for (const auto& s : r.samples) {
    append_decimal9(out, s.t);
    for (double v : s.a) {
      out += ',';
      append_decimal9(out, v);
    }
    for (double v : s.w) {
      out += ',';
      append_decimal9(out, v);
    }
    out += '\n';
  }
  return out;
}

namespace detail {
inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\xEF' || s.front() == '\xBB' ||
                        s.front() == '\xBF'))
    s.remove_prefix(1);
  return s;
}

inline double parse_field(std::string_view f, std::size_t line) {
  f = trim(f);
  if (!f.empty() && f.front() == '+') f.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || p != f.data() + f.size() || f.empty())
    throw ParseError(line, "not a number: '" + std::string(f) + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value");
  return v;
}
}  // namespace detail

/// Parses a sensor log. Samples are kept exactly as written; timestamps must
/// increase strictly and no step may exceed 5 sample periods.
inline Recording ingest_recording(std::string_view csv_text, const ManifestEntry& meta,
                                  double fs_hz = kDefaultSampleRateHz) {
  require(fs_hz > 0.0, "sample rate must be positive");
  Recording rec;
  rec.id = meta.path;
  rec.subject_id = meta.subject;
  rec.exercise = meta.exercise;
  rec.side = meta.side;
  rec.fs_hz = fs_hz;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < csv_text.size()) {
    auto nl = csv_text.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv_text.size();
    const auto line = detail::trim(csv_text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError(line_no, "expected header '" + std::string(kCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    std::array<double, 7> v{};
    std::size_t field = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto tok = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (field >= 7) throw ParseError(line_no, "too many fields");
      v[field++] = detail::parse_field(tok, line_no);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (field != 7) throw ParseError(line_no, "expected 7 fields, got " + std::to_string(field));
    rec.samples.push_back(SensorSample{v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6]}});
  }
  if (!header_seen) throw ParseError(1, "missing header");
  if (rec.samples.size() < 2) throw ValidationError("recording needs at least 2 rows: " + meta.path);

  const double max_step = 5.0 / fs_hz;
  if (rec.samples.front().t < 0.0) throw SequencingError("negative timestamp in " + meta.path);
  for (std::size_t i = 1; i < rec.samples.size(); ++i) {
    const double dt = rec.samples[i].t - rec.samples[i - 1].t;
    if (!(dt > 0.0))
      throw SequencingError("timestamp does not increase at sample " + std::to_string(i) + " of " + meta.path);
    if (dt > max_step)
      throw GapError("gap of " + std::to_string(dt) + " s at sample " + std::to_string(i) + " of " + meta.path);
  }
  if (meta.annotation) {
    require(meta.annotation->end <= rec.samples.size(), "annotation exceeds recording length: " + meta.path);
    rec.annotation = meta.annotation;
  }
  return rec;
}

inline ManifestEntry manifest_entry(const Recording& r) {
  return ManifestEntry{r.id, r.subject_id, r.exercise, r.side, r.annotation};
}

}  // namespace sarc
