#include <gtest/gtest.h>

#include "sarc/annotate.hpp"
#include "sarc/synth.hpp"
#include "support/oracles.hpp"

using namespace sarc;

namespace {

Recording constant(std::size_t n, std::array<double, 3> a) {
  Recording r;
  r.id = "c";
  for (std::size_t i = 0; i < n; ++i) r.samples.push_back({static_cast<double>(i) / 50.0, a, {0, 0, 0}});
  return r;
}

// Trailing mean of |a|^2 re-summed from scratch at every sample.
std::vector<double> naive_profile(const Recording& r, double seconds) {
  const auto w = static_cast<std::size_t>(std::ceil(seconds * r.fs_hz - 1e-9));
  std::vector<double> out;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const std::size_t lo = i + 1 >= w ? i + 1 - w : 0;
    long double s = 0.0L;
    for (std::size_t j = lo; j <= i; ++j)
      for (double v : r.samples[j].a) s += static_cast<long double>(v) * v;
    out.push_back(static_cast<double>(s / static_cast<long double>(i + 1 - lo)));
  }
  return out;
}

}  // namespace

TEST(EnergyProfile, ConstantGravityGivesOne) {
  for (double t : {0.1, 1.0, 2.0, 7.3}) {
    const auto p = energy_profile(constant(300, {0, 0, 1}), t);
    ASSERT_EQ(p.values.size(), 300u);
    for (double v : p.values) EXPECT_DOUBLE_EQ(v, 1.0);
  }
}

TEST(EnergyProfile, ZeroSignal) {
  const auto p = energy_profile(constant(120, {0, 0, 0}));
  for (double v : p.values) EXPECT_EQ(v, 0.0);
}

TEST(EnergyProfile, MatchesNaiveResummation) {
  Rng rng(21);
  for (std::size_t n : {500u, 5000u}) {
    const auto rec = oracle::random_recording(n, rng);
    const auto p = energy_profile(rec, 2.0);
    const auto want = naive_profile(rec, 2.0);
    EXPECT_EQ(p.window_samples, 100u);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p.values[i], want[i], 1e-12 * want[i]) << i;
  }
}

TEST(EnergyProfile, WindowRoundsUp) {
  EXPECT_EQ(energy_profile(constant(10, {0, 0, 1}), 0.05).window_samples, 3u);
  EXPECT_EQ(energy_profile(constant(10, {0, 0, 1}), 0.04).window_samples, 2u);
}

TEST(EnergyProfile, PrependedZerosShiftTheTail) {
  Rng rng(22);
  const auto rec = oracle::random_recording(400, rng);
  Recording padded = constant(37, {0, 0, 0});
  padded.samples.insert(padded.samples.end(), rec.samples.begin(), rec.samples.end());
  const auto a = energy_profile(rec), b = energy_profile(padded);
  for (std::size_t i = a.window_samples; i < a.values.size(); ++i) EXPECT_NEAR(b.values[i + 37], a.values[i], 1e-12);
}

TEST(EnergyProfile, RejectsBadInput) {
  EXPECT_THROW(energy_profile(constant(10, {0, 0, 1}), 0.0), ValidationError);
  EXPECT_THROW(energy_profile(Recording{}), ValidationError);
}

TEST(AnnotateActive, SinglePlateau) {
  EnergyProfile p{{0.1, 0.1, 1.0, 1.0, 1.0, 0.1}, 2.0, 1};
  EXPECT_EQ(annotate_active(p, 0.33), (Interval{2, 5}));
}

TEST(AnnotateActive, LongestRunWinsAndTiesGoEarliest) {
  EnergyProfile p{{1, 1, 0, 1, 1, 1, 0, 1, 1, 1}, 2.0, 1};
  EXPECT_EQ(annotate_active(p, 0.5), (Interval{3, 6}));
  EnergyProfile q{{1, 1, 0, 1, 1}, 2.0, 1};
  EXPECT_EQ(annotate_active(q, 0.5), (Interval{0, 2}));
}

TEST(AnnotateActive, ZeroProfileIsNoActivity) {
  EnergyProfile p{std::vector<double>(20, 0.0), 2.0, 1};
  try {
    annotate_active(p);
    FAIL();
  } catch (const NoActivityError& e) {
    EXPECT_EQ(e.error_class(), ErrorClass::Validation);
  }
}

TEST(AnnotateActive, FractionOutOfRange) {
  EnergyProfile p{{1, 2}, 2.0, 1};
  EXPECT_THROW(annotate_active(p, 0.0), ValidationError);
  EXPECT_THROW(annotate_active(p, 1.0), ValidationError);
}

TEST(AnnotateActive, ScaleInvariant) {
  Rng rng(23);
  auto rec = oracle::random_recording(600, rng);
  for (std::size_t i = 200; i < 400; ++i)
    for (auto& v : rec.samples[i].a) v *= 3.0;
  const auto base = annotate_active(energy_profile(rec));
  for (double c : {-2.0, 0.5, 4.0}) {
    auto scaled = rec;
    for (auto& s : scaled.samples)
      for (auto& v : s.a) v *= c;
    EXPECT_EQ(annotate_active(energy_profile(scaled)), base) << c;
  }
}

TEST(AnnotateActive, RecoversSyntheticActiveSpan) {
  SynthConfig cfg;
  cfg.n_subjects = 3;
  const auto ds = generate_dataset(cfg);
  for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
    if (ds.recordings[i].exercise != ExerciseClass::ABD) continue;
    const auto& truth = ds.active_spans[i];
    const auto got = annotate_active(energy_profile(ds.recordings[i]));
    const std::size_t inter = std::min(got.end, truth.end) > std::max(got.start, truth.start)
                                  ? std::min(got.end, truth.end) - std::max(got.start, truth.start)
                                  : 0;
    const std::size_t padding = truth.start + (ds.recordings[i].samples.size() - truth.end);
    EXPECT_GE(static_cast<double>(inter), 0.95 * static_cast<double>(truth.size())) << ds.recordings[i].id;
    EXPECT_LE(static_cast<double>(got.size() - inter), 0.05 * static_cast<double>(padding)) << ds.recordings[i].id;
  }
}

TEST(ReviewAnnotation, Override) {
  const auto rec = constant(500, {0, 0, 1});
  EXPECT_EQ(review_annotation(rec, {10, 400}).annotation, (Interval{10, 400}));
  EXPECT_THROW(review_annotation(rec, {400, 10}), ValidationError);
  EXPECT_THROW(review_annotation(rec, {10, 10}), ValidationError);
  EXPECT_THROW(review_annotation(rec, {10, 501}), ValidationError);
}

TEST(ReviewAnnotation, SameIntervalIsIdempotent) {
  SynthConfig cfg;
  cfg.n_subjects = 1;
  cfg.reps_per_set = 4;
  const auto rec = auto_annotate(generate_dataset(cfg).recordings[3]);
  EXPECT_EQ(review_annotation(rec, *rec.annotation), rec);
}
