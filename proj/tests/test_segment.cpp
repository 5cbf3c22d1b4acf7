#include <gtest/gtest.h>

#include "sarc/segment.hpp"
#include "support/oracles.hpp"

using namespace sarc;

namespace {
Recording annotated(std::size_t n, Interval iv, std::uint64_t seed = 31) {
  Rng rng(seed);
  return oracle::random_recording(n, rng, iv);
}
}  // namespace

TEST(SegmentationSpec, DefaultsGiveHundredSampleWindows) {
  const SegmentationSpec s;
  EXPECT_EQ(s.length(), 100u);
  EXPECT_EQ(s.stride(), 25u);
  EXPECT_EQ((SegmentationSpec{2.0, 0.95, 50.0}.stride()), 5u);
  EXPECT_EQ((SegmentationSpec{2.0, 0.0, 50.0}.stride()), 100u);
  EXPECT_EQ((SegmentationSpec{0.04, 0.9, 50.0}.stride()), 1u);
}

TEST(SegmentationSpec, Validation) {
  EXPECT_THROW((SegmentationSpec{2.0, 1.0, 50.0}.validate()), ValidationError);
  EXPECT_THROW((SegmentationSpec{2.0, -0.1, 50.0}.validate()), ValidationError);
  EXPECT_THROW((SegmentationSpec{0.02, 0.5, 50.0}.validate()), ValidationError);
  EXPECT_NO_THROW((SegmentationSpec{0.04, 0.5, 50.0}.validate()));
}

TEST(Segment, SeventeenWindows) {
  const auto rec = annotated(600, {50, 550});
  const auto wt = segment(std::span(&rec, 1), SegmentationSpec{});
  ASSERT_EQ(wt.size(), 17u);
  for (std::size_t i = 0; i < 17; ++i) EXPECT_EQ(wt.meta[i].start_sample, 50 + 25 * i);
  EXPECT_EQ(wt.length, 100u);
}

TEST(Segment, ShortRecordingContributesNothing) {
  std::vector<Recording> recs{annotated(80, {0, 80}), annotated(300, {0, 300}, 32)};
  const auto wt = segment(recs, SegmentationSpec{});
  EXPECT_EQ(wt.size(), 9u);
  EXPECT_EQ(wt.sources.size(), 2u);
  for (const auto& m : wt.meta) EXPECT_EQ(m.source, 1u);
}

TEST(Segment, UnannotatedRecording) {
  Rng rng(1);
  const auto rec = oracle::random_recording(200, rng);
  EXPECT_THROW(segment(std::span(&rec, 1), SegmentationSpec{}), AnnotationMissingError);
}

TEST(Segment, RandomTriplesMatchEnumeration) {
  Rng rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t l = 2 + rng.below(60), s = 1 + rng.below(l), m = rng.below(5 * l);
    const std::size_t pad = rng.below(10);
    const auto rec = annotated(m + 2 * pad + 1, {pad, pad + std::max<std::size_t>(m, 1)}, trial);
    SegmentationSpec spec{static_cast<double>(l) / 50.0, 1.0 - static_cast<double>(s) / static_cast<double>(l), 50.0};
    if (spec.overlap_fraction >= 1.0) spec.overlap_fraction = 0.999999;
    ASSERT_EQ(spec.length(), l);
    ASSERT_EQ(spec.stride(), s);
    const auto wt = segment(std::span(&rec, 1), spec);
    const auto starts = oracle::window_starts(*rec.annotation, l, s);
    ASSERT_EQ(wt.size(), starts.size());
    EXPECT_EQ(wt.size(), window_count(rec.annotation->size(), l, s));
    for (std::size_t w = 0; w < starts.size(); ++w) {
      ASSERT_EQ(wt.meta[w].start_sample, starts[w]);
      for (std::size_t t = 0; t < l; ++t) {
        const auto& smp = rec.samples[starts[w] + t];
        EXPECT_EQ(wt.at(w, t, 0), smp.a[0]);
        EXPECT_EQ(wt.at(w, t, 5), smp.w[2]);
      }
    }
  }
}

TEST(Segment, LabelsAndProvenance) {
  auto rec = annotated(400, {20, 380});
  rec.exercise = ExerciseClass::TRAP;
  rec.side = Side::LEFT;
  rec.subject_id = "S07";
  const auto wt = segment(std::span(&rec, 1), SegmentationSpec{});
  for (std::size_t i = 0; i < wt.size(); ++i) {
    EXPECT_EQ(wt.labels[i], ExerciseClass::TRAP);
    EXPECT_EQ(wt.side(i), Side::LEFT);
    EXPECT_EQ(wt.source_of(i).subject_id, "S07");
    EXPECT_GE(wt.meta[i].start_sample, 20u);
    EXPECT_LE(wt.meta[i].start_sample + wt.length, 380u);
  }
}

TEST(SegmentBlocks, ThousandSamplesInFiveBlocks) {
  const auto rec = annotated(1000, {0, 1000});
  const auto blocks = block_bounds(*rec.annotation, 5);
  ASSERT_EQ(blocks.size(), 5u);
  for (std::size_t b = 0; b < 5; ++b) EXPECT_EQ(blocks[b], (Interval{200 * b, 200 * (b + 1)}));
  const auto wt = segment_blocks(std::span(&rec, 1), SegmentationSpec{}, 5);
  EXPECT_EQ(wt.size(), 5u * 5u);
  for (std::size_t i = 0; i < wt.size(); ++i) {
    const auto& bb = blocks[static_cast<std::size_t>(wt.meta[i].block)];
    EXPECT_GE(wt.meta[i].start_sample, bb.start);
    EXPECT_LE(wt.meta[i].start_sample + wt.length, bb.end);
  }
}

TEST(SegmentBlocks, ShortRecordingKeptWhole) {
  std::vector<Recording> recs{annotated(1000, {0, 1000}), annotated(300, {0, 300}, 2)};
  std::vector<std::size_t> short_ids;
  const auto wt = segment_blocks(recs, SegmentationSpec{}, 5, &short_ids);
  EXPECT_EQ(short_ids, (std::vector<std::size_t>{1}));
  std::size_t from_short = 0;
  for (std::size_t i = 0; i < wt.size(); ++i)
    if (wt.meta[i].source == 1) {
      ++from_short;
      EXPECT_EQ(wt.meta[i].block, 1);
    }
  EXPECT_EQ(from_short, 9u);
}

TEST(WindowTensor, SubsetKeepsRows) {
  const auto rec = annotated(600, {0, 600});
  const auto wt = segment(std::span(&rec, 1), SegmentationSpec{});
  const std::vector<std::size_t> idx{3, 0, 7};
  const auto sub = wt.subset(idx);
  ASSERT_EQ(sub.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto a = sub.window(k), b = wt.window(idx[k]);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    EXPECT_EQ(sub.meta[k], wt.meta[idx[k]]);
  }
}
