#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sarc/data_model.hpp"

namespace sarc {

struct SegmentationSpec {
  double window_seconds = 2.0;
  double overlap_fraction = 0.75;
  double fs_hz = kDefaultSampleRateHz;

  /// Window length L in samples.
  std::size_t length() const { return static_cast<std::size_t>(std::llround(window_seconds * fs_hz)); }
  /// Stride between consecutive window starts; 95% overlap of 100 samples gives 5.
  std::size_t stride() const {
    const auto s = std::llround(static_cast<double>(length()) * (1.0 - overlap_fraction));
    return static_cast<std::size_t>(std::max<long long>(1, s));
  }
  void validate() const {
    require(overlap_fraction >= 0.0 && overlap_fraction < 1.0, "overlap fraction must be in [0, 1)");
    require(window_seconds > 0.0 && fs_hz > 0.0, "window length and sample rate must be positive");
    require(length() >= 2, "window must span at least 2 samples");
  }
};

/// Recording-level provenance shared by the windows cut from it.
struct WindowSource {
  std::string recording_id;
  std::string subject_id;
  ExerciseClass exercise = ExerciseClass::PEN;
  Side side = Side::RIGHT;
  Interval interval;  // annotated active portion
  friend bool operator==(const WindowSource&, const WindowSource&) = default;
};

struct WindowMeta {
  std::size_t source = 0;        // index into WindowTensor::sources
  std::size_t start_sample = 0;  // absolute sample index in the recording
  int block = -1;                // temporal block the window was cut from, if any
  friend bool operator==(const WindowMeta&, const WindowMeta&) = default;
};

/// The segmented signal tensor, N x L x 6, channels ax, ay, az, wx, wy, wz.
struct WindowTensor {
  std::size_t length = 0;
  std::vector<double> data;
  std::vector<ExerciseClass> labels;
  std::vector<WindowMeta> meta;
  std::vector<WindowSource> sources;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t stride() const noexcept { return length * kNumChannels; }
  std::span<const double> window(std::size_t i) const noexcept { return {data.data() + i * stride(), stride()}; }
  double at(std::size_t i, std::size_t t, std::size_t c) const noexcept {
    return data[i * stride() + t * kNumChannels + c];
  }
  const WindowSource& source_of(std::size_t i) const { return sources[meta[i].source]; }
  Side side(std::size_t i) const { return source_of(i).side; }

  WindowTensor subset(std::span<const std::size_t> idx) const {
    WindowTensor out;
    out.length = length;
    out.sources = sources;
    out.data.reserve(idx.size() * stride());
    for (auto i : idx) {
      const auto w = window(i);
      out.data.insert(out.data.end(), w.begin(), w.end());
      out.labels.push_back(labels[i]);
      out.meta.push_back(meta[i]);
    }
    return out;
  }
  friend bool operator==(const WindowTensor&, const WindowTensor&) = default;
};

/// Number of windows of length L at stride s that fit in M samples.
constexpr std::size_t window_count(std::size_t m, std::size_t l, std::size_t s) noexcept {
  return m < l ? 0 : (m - l) / s + 1;
}

/// Splits an interval into k contiguous blocks of near-equal length.
inline std::vector<Interval> block_bounds(const Interval& iv, std::size_t k) {
  std::vector<Interval> out;
  const std::size_t m = iv.size();
  for (std::size_t b = 0; b < k; ++b) out.push_back({iv.start + m * b / k, iv.start + m * (b + 1) / k});
  return out;
}

namespace segment_detail {
inline void append_windows(WindowTensor& wt, const Recording& rec, std::size_t source, const Interval& iv,
                           std::size_t l, std::size_t s, int block) {
  const std::size_t n = window_count(iv.size(), l, s);
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t start = iv.start + w * s;
    for (std::size_t t = 0; t < l; ++t) {
      const auto& smp = rec.samples[start + t];
      wt.data.insert(wt.data.end(), {smp.a[0], smp.a[1], smp.a[2], smp.w[0], smp.w[1], smp.w[2]});
    }
    wt.labels.push_back(rec.exercise);
    wt.meta.push_back({source, start, block});
  }
}

inline WindowSource source_for(const Recording& r) {
  if (!r.annotation) throw AnnotationMissingError("recording " + r.id + " has no annotation");
  require(r.annotation->end <= r.samples.size() && r.annotation->start < r.annotation->end,
          "annotation out of range for " + r.id);
  return WindowSource{r.id, r.subject_id, r.exercise, r.side, *r.annotation};
}
}  // namespace segment_detail

/// Cuts each annotated interval into windows anchored at the interval start.
/// Windows never leave the interval, so every window is fully labeled.
inline WindowTensor segment(std::span<const Recording> recordings, const SegmentationSpec& spec) {
  spec.validate();
  WindowTensor wt;
  wt.length = spec.length();
  const std::size_t s = spec.stride();
  for (const auto& r : recordings) {
    wt.sources.push_back(segment_detail::source_for(r));
    segment_detail::append_windows(wt, r, wt.sources.size() - 1, *r.annotation, wt.length, s, -1);
  }
  return wt;
}

/// Like segment(), but each annotated interval is first cut into k time
/// blocks and windows are generated inside blocks only, tagged with the block
/// index. A recording whose blocks cannot hold a single window is kept whole
/// and tagged with block (recording index mod k); its index is added to
/// `short_recordings` when provided.
inline WindowTensor segment_blocks(std::span<const Recording> recordings, const SegmentationSpec& spec, std::size_t k,
                                   std::vector<std::size_t>* short_recordings = nullptr) {
  spec.validate();
  require(k >= 1, "block count must be >= 1");
  WindowTensor wt;
  wt.length = spec.length();
  const std::size_t s = spec.stride();
  for (std::size_t ri = 0; ri < recordings.size(); ++ri) {
    const auto& r = recordings[ri];
    wt.sources.push_back(segment_detail::source_for(r));
    const auto blocks = block_bounds(*r.annotation, k);
    const bool too_short = std::any_of(blocks.begin(), blocks.end(), [&](const Interval& b) { return b.size() < wt.length; });
    if (too_short) {
      if (short_recordings) short_recordings->push_back(ri);
      segment_detail::append_windows(wt, r, ri, *r.annotation, wt.length, s, static_cast<int>(ri % k));
      continue;
    }
    for (std::size_t b = 0; b < k; ++b)
      segment_detail::append_windows(wt, r, ri, blocks[b], wt.length, s, static_cast<int>(b));
  }
  return wt;
}

}  // namespace sarc
