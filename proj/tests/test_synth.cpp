#include <gtest/gtest.h>

#include <map>
#include <set>

#include "sarc/annotate.hpp"
#include "sarc/parallel.hpp"
#include "sarc/synth.hpp"

using namespace sarc;

namespace {
SynthConfig small(std::size_t subjects = 3, std::size_t reps = 4) {
  SynthConfig c;
  c.n_subjects = subjects;
  c.reps_per_set = reps;
  c.rest_padding = 3.0;
  return c;
}
}  // namespace

TEST(Synth, SameConfigSameDataset) {
  const auto a = generate_dataset(small());
  const auto b = generate_dataset(small());
  EXPECT_EQ(a.recordings, b.recordings);
  EXPECT_EQ(a.active_spans, b.active_spans);
}

TEST(Synth, SeedChangesOutput) {
  auto c = small();
  const auto a = generate_dataset(c);
  c.seed = 43;
  const auto b = generate_dataset(c);
  EXPECT_NE(a.recordings.front().samples, b.recordings.front().samples);
}

TEST(Synth, ThreadCountDoesNotMatter) {
  set_thread_count(1);
  const auto a = generate_dataset(small(2, 3));
  set_thread_count(4);
  const auto b = generate_dataset(small(2, 3));
  set_thread_count(1);
  EXPECT_EQ(a.recordings, b.recordings);
}

TEST(Synth, DefaultProtocolShape) {
  const SynthConfig cfg;
  const auto ds = generate_dataset(cfg);
  ASSERT_EQ(ds.recordings.size(), 280u);
  ASSERT_EQ(ds.manifest.files.size(), 280u);
  std::map<std::tuple<std::string, ExerciseClass, Side>, int> seen;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
    const auto& r = ds.recordings[i];
    ++seen[{r.subject_id, r.exercise, r.side}];
    ids.insert(r.id);
    EXPECT_FALSE(r.annotation.has_value());
    EXPECT_EQ(ds.manifest.files[i].path, r.id);
    // Active portion is the rep count times a period inside the configured range.
    const double per_rep = static_cast<double>(ds.active_spans[i].size()) / cfg.fs_hz / cfg.reps_per_set;
    EXPECT_GE(per_rep, 0.5 * cfg.rep_period_min) << r.id;
    EXPECT_LE(per_rep, 1.5 * cfg.rep_period_max) << r.id;
    EXPECT_EQ(ds.active_spans[i].start, static_cast<std::size_t>(cfg.rest_padding * cfg.fs_hz));
    EXPECT_EQ(r.samples.size() - ds.active_spans[i].end, ds.active_spans[i].start);
  }
  EXPECT_EQ(seen.size(), 280u);
  EXPECT_EQ(ids.size(), 280u);
  for (const auto& [key, n] : seen) EXPECT_EQ(n, 1);
}

TEST(Synth, TimestampsFollowSampleRate) {
  const auto ds = generate_dataset(small(1, 2));
  const auto& s = ds.recordings.front().samples;
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_NEAR(s[i].t - s[i - 1].t, 0.02, 1e-9);
}

TEST(Synth, WithoutSubjectShiftSubjectsDifferOnlyByNoise) {
  auto cfg = small(2, 6);
  cfg.subject_shift_strength = 0.0;
  const auto ds = generate_dataset(cfg);
  const std::size_t per_subject = 2 * kNumClasses;
  for (std::size_t k = 0; k < per_subject; ++k) {
    const auto& a = ds.recordings[k];
    const auto& b = ds.recordings[per_subject + k];
    ASSERT_EQ(a.exercise, b.exercise);
    ASSERT_EQ(ds.active_spans[k], ds.active_spans[per_subject + k]);
    const auto span = ds.active_spans[k];
    for (std::size_t c = 0; c < 6; ++c) {
      double diff = 0.0;
      for (std::size_t i = span.start; i < span.end; ++i) {
        const double va = c < 3 ? a.samples[i].a[c] : a.samples[i].w[c - 3];
        const double vb = c < 3 ? b.samples[i].a[c] : b.samples[i].w[c - 3];
        diff += std::abs(va - vb);
      }
      diff /= static_cast<double>(span.size());
      const double noise = c < 3 ? cfg.accel_noise_std : cfg.gyro_noise_std;
      EXPECT_LT(diff, 3.0 * noise) << a.id << " channel " << c;
    }
  }
}

TEST(Synth, WithSubjectShiftSubjectsDiffer) {
  const auto ds = generate_dataset(small(2, 6));
  const auto& a = ds.recordings[0];
  const auto& b = ds.recordings[2 * kNumClasses];
  EXPECT_NE(a.samples, b.samples);
}

TEST(Synth, ActivePortionCarriesMoreEnergyThanRest) {
  const auto ds = generate_dataset(small(2, 5));
  for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
    const auto& r = ds.recordings[i];
    const auto span = ds.active_spans[i];
    auto dyn = [&](std::size_t lo, std::size_t hi) {
      double s = 0.0;
      for (std::size_t t = lo; t < hi; ++t)
        for (double v : r.samples[t].a) s += v * v;
      return s / static_cast<double>(hi - lo);
    };
    EXPECT_GT(dyn(span.start, span.end), 3.0 * dyn(0, span.start)) << r.id;
  }
}

TEST(Synth, MirrorPairsShareTemplateEnergy) {
  const auto& t = synth_detail::class_templates();
  const auto ir = static_cast<std::size_t>(ExerciseClass::IR), er = static_cast<std::size_t>(ExerciseClass::ER);
  for (std::size_t ax = 0; ax < 3; ++ax)
    for (std::size_t h = 0; h < synth_detail::kHarmonics; ++h) {
      EXPECT_DOUBLE_EQ(t[ir].accel_amp[ax][h], t[er].accel_amp[ax][h]);
      EXPECT_DOUBLE_EQ(t[ir].gyro_amp[ax][h], t[er].gyro_amp[ax][h]);
    }
}

TEST(Synth, InvalidConfigRejected) {
  auto c = small();
  c.n_subjects = 0;
  EXPECT_THROW(generate_dataset(c), ValidationError);
  c = small();
  c.subject_shift_strength = 1.5;
  EXPECT_THROW(generate_dataset(c), ValidationError);
  c = small();
  c.rep_period_min = 0.1;
  EXPECT_THROW(generate_dataset(c), ValidationError);
}
