#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sarc/data_model.hpp"

namespace sarc {

/// Per-sample moving-average accelerometer energy (g^2).
struct EnergyProfile {
  std::vector<double> values;
  double window_seconds = 2.0;
  std::size_t window_samples = 0;
};

/// Trailing moving average of |a|^2 over ceil(T * fs) samples. The first
/// samples average over whatever history is available.
inline EnergyProfile energy_profile(const Recording& rec, double window_seconds = 2.0) {
  require(window_seconds > 0.0, "energy window must be positive");
  require(!rec.samples.empty(), "cannot profile an empty recording");
  const auto w = static_cast<std::size_t>(std::max(1.0, std::ceil(window_seconds * rec.fs_hz - 1e-9)));
  const std::size_t n = rec.samples.size();
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = rec.samples[i].a;
    e[i] = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  }
  // Running sums drift; Kahan-compensate and resum exactly once per window
  // length so long recordings stay within the naive oracle's rounding.
  EnergyProfile p{std::vector<double>(n), window_seconds, w};
  double sum = 0.0, comp = 0.0;
  auto add = [&](double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= w && (i % w) == 0) {
      sum = 0.0;
      comp = 0.0;
      for (std::size_t j = i + 1 - w; j < i; ++j) add(e[j]);
      add(e[i]);
    } else {
      add(e[i]);
      if (i >= w) add(-e[i - w]);
    }
    const std::size_t count = std::min(i + 1, w);
    p.values[i] = std::max(0.0, sum / static_cast<double>(count));
  }
  return p;
}

/// Longest contiguous run with energy >= fraction * max(energy); ties go to
/// the earliest run.
inline Interval annotate_active(const EnergyProfile& profile, double threshold_fraction = 0.33) {
  require(threshold_fraction > 0.0 && threshold_fraction < 1.0, "threshold fraction must be in (0, 1)");
  require(!profile.values.empty(), "empty energy profile");
  const double peak = *std::max_element(profile.values.begin(), profile.values.end());
  if (!(peak > 0.0)) throw NoActivityError("energy profile is identically zero");
  const double threshold = threshold_fraction * peak;
  Interval best{};
  std::size_t run_start = 0;
  bool in_run = false;
  const std::size_t n = profile.values.size();
  for (std::size_t i = 0; i <= n; ++i) {
    const bool above = i < n && profile.values[i] >= threshold;
    if (above && !in_run) {
      run_start = i;
      in_run = true;
    } else if (!above && in_run) {
      if (i - run_start > best.size()) best = Interval{run_start, i};
      in_run = false;
    }
  }
  return best;
}

/// Replaces the annotation (the manual-correction step).
inline Recording review_annotation(Recording rec, Interval interval) {
  if (!(interval.start < interval.end) || interval.end > rec.samples.size())
    throw ValidationError("annotation override [" + std::to_string(interval.start) + ", " +
                          std::to_string(interval.end) + ") is invalid for " + rec.id + " with " +
                          std::to_string(rec.samples.size()) + " samples");
  rec.annotation = interval;
  return rec;
}

inline Recording auto_annotate(Recording rec, double window_seconds = 2.0, double threshold_fraction = 0.33) {
  const auto iv = annotate_active(energy_profile(rec, window_seconds), threshold_fraction);
  return review_annotation(std::move(rec), iv);
}

}  // namespace sarc
