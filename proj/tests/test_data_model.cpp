#include <gtest/gtest.h>

#include "sarc/data_model.hpp"
#include "sarc/synth.hpp"

using namespace sarc;

namespace {

ManifestEntry entry(std::string path = "S01/rec.csv") {
  return ManifestEntry{std::move(path), "S01", ExerciseClass::ABD, Side::RIGHT, std::nullopt};
}

nlohmann::json manifest_doc(std::size_t subjects) {
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t s = 0; s < subjects; ++s)
    for (auto name : kClassNames)
      for (const char* side : {"L", "R"}) {
        const std::string subj = "S" + std::to_string(s + 1);
        files.push_back({{"path", subj + "/" + std::string(name) + "_" + side + ".csv"},
                         {"subject", subj},
                         {"exercise", name},
                         {"side", side}});
      }
  return {{"fs_hz", 50.0}, {"units", {{"accel", "g"}, {"gyro", "rad_s"}}}, {"files", files}};
}

}  // namespace

TEST(Ingest, ThreeRows) {
  const std::string csv = "t,ax,ay,az,wx,wy,wz\n0.00,0,0,1,0,0,0\n0.02,0.1,0,1,0,0.5,0\n0.04,0,0,1,0,0,0\n";
  const auto r = ingest_recording(csv, entry());
  ASSERT_EQ(r.samples.size(), 3u);
  EXPECT_DOUBLE_EQ(r.samples.back().t - r.samples.front().t, 0.04);
  EXPECT_EQ(r.samples[1].a[0], 0.1);
  EXPECT_EQ(r.samples[1].w[1], 0.5);
  EXPECT_EQ(r.exercise, ExerciseClass::ABD);
  EXPECT_FALSE(r.annotation.has_value());
}

TEST(Ingest, RepeatedTimestampIsSequencingError) {
  const std::string csv = "t,ax,ay,az,wx,wy,wz\n0.00,0,0,1,0,0,0\n0.00,0,0,1,0,0,0\n";
  EXPECT_THROW(ingest_recording(csv, entry()), SequencingError);
}

TEST(Ingest, DecreasingTimestampIsSequencingError) {
  const std::string csv = "t,ax,ay,az,wx,wy,wz\n0.04,0,0,1,0,0,0\n0.02,0,0,1,0,0,0\n";
  EXPECT_THROW(ingest_recording(csv, entry()), SequencingError);
}

TEST(Ingest, GapBeyondFivePeriods) {
  const std::string ok = "t,ax,ay,az,wx,wy,wz\n0.00,0,0,1,0,0,0\n0.10,0,0,1,0,0,0\n";
  EXPECT_NO_THROW(ingest_recording(ok, entry()));
  const std::string gap = "t,ax,ay,az,wx,wy,wz\n0.00,0,0,1,0,0,0\n0.12,0,0,1,0,0,0\n";
  EXPECT_THROW(ingest_recording(gap, entry()), GapError);
}

TEST(Ingest, ParseErrorReportsLine) {
  const std::string csv = "t,ax,ay,az,wx,wy,wz\n0.00,0,0,1,0,0,0\n0.02,0,abc,1,0,0,0\n";
  try {
    ingest_recording(csv, entry());
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3u);
    EXPECT_EQ(e.error_class(), ErrorClass::Validation);
  }
  EXPECT_THROW(ingest_recording("t,ax,ay,az,wx,wy,wz\n0,0,0,1,0,0\n0.02,0,0,1,0,0,0\n", entry()), ParseError);
  EXPECT_THROW(ingest_recording("time,ax\n0,0\n", entry()), ParseError);
  EXPECT_THROW(ingest_recording("t,ax,ay,az,wx,wy,wz\n0,0,0,nan,0,0,0\n0.02,0,0,1,0,0,0\n", entry()), ParseError);
}

TEST(Ingest, AcceptsCrlfAndBlankLines) {
  const std::string csv = "t,ax,ay,az,wx,wy,wz\r\n0.00,0,0,1,0,0,0\r\n\r\n0.02,0,0,1,0,0,0\r\n";
  EXPECT_EQ(ingest_recording(csv, entry()).samples.size(), 2u);
}

TEST(Ingest, AnnotationMustFit) {
  auto e = entry();
  e.annotation = Interval{0, 5};
  const std::string csv = "t,ax,ay,az,wx,wy,wz\n0.00,0,0,1,0,0,0\n0.02,0,0,1,0,0,0\n";
  EXPECT_THROW(ingest_recording(csv, e), ValidationError);
  e.annotation = Interval{0, 2};
  EXPECT_EQ(ingest_recording(csv, e).annotation, (Interval{0, 2}));
}

TEST(Ingest, SynthRecordingRoundTripsBitIdentically) {
  SynthConfig cfg;
  cfg.n_subjects = 1;
  cfg.reps_per_set = 5;
  cfg.rest_padding = 2.0;
  const auto rr = synth_detail::generate_recording(cfg, 0, ExerciseClass::IR, Side::LEFT);
  const auto& rec = rr.rec;
  ASSERT_GE(rec.samples.size(), 500u);
  // Stored values are exactly what the 9-digit text format carries, so a
  // write-then-ingest cycle must reproduce them bit for bit.
  const std::string csv = write_recording_csv(rec);
  const auto back = ingest_recording(csv, manifest_entry(rec));
  ASSERT_EQ(back.samples.size(), rec.samples.size());
  for (std::size_t i = 0; i < rec.samples.size(); ++i) EXPECT_EQ(back.samples[i], rec.samples[i]) << "sample " << i;
  EXPECT_EQ(write_recording_csv(back), csv);
}

TEST(Ingest, ThousandRowFileRoundTrips) {
  Recording rec;
  rec.id = "x.csv";
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    SensorSample s;
    s.t = quantize9(i / 50.0);
    for (auto& v : s.a) v = quantize9(rng.normal());
    for (auto& v : s.w) v = quantize9(3.0 * rng.normal());
    rec.samples.push_back(s);
  }
  const auto back = ingest_recording(write_recording_csv(rec), manifest_entry(rec));
  ASSERT_EQ(back.samples.size(), 1000u);
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ(back.samples[i], rec.samples[i]);
}

TEST(Manifest, FullProtocolHas280Entries) {
  const auto m = load_manifest(manifest_doc(20).dump());
  EXPECT_EQ(m.files.size(), 280u);
  EXPECT_EQ(m.fs_hz, 50.0);
}

TEST(Manifest, UnknownExercise) {
  auto doc = manifest_doc(1);
  doc["files"][0]["exercise"] = "SQUAT";
  EXPECT_THROW(load_manifest(doc.dump()), ValidationError);
}

TEST(Manifest, EmptyFileList) {
  EXPECT_TRUE(load_manifest(R"({"files": []})").files.empty());
}

TEST(Manifest, DuplicatePath) {
  auto doc = manifest_doc(1);
  doc["files"][1]["path"] = doc["files"][0]["path"];
  EXPECT_THROW(load_manifest(doc.dump()), ValidationError);
}

TEST(Manifest, RejectsOtherUnits) {
  auto doc = manifest_doc(1);
  doc["units"]["accel"] = "m_s2";
  EXPECT_THROW(load_manifest(doc.dump()), ValidationError);
  doc = manifest_doc(1);
  doc["units"]["gyro"] = "deg_s";
  EXPECT_THROW(load_manifest(doc.dump()), ValidationError);
}

TEST(Manifest, MalformedDocuments) {
  EXPECT_THROW(load_manifest("{not json"), ValidationError);
  EXPECT_THROW(load_manifest("[]"), ValidationError);
  EXPECT_THROW(load_manifest(R"({"files": [{"path": "a"}]})"), ValidationError);
  EXPECT_THROW(load_manifest(R"({"files": [{"path": "a", "subject": "S", "exercise": "ABD", "side": "X"}]})"),
               ValidationError);
}

TEST(Manifest, RoundTripsThroughJson) {
  auto m = load_manifest(manifest_doc(2).dump());
  m.files[3].annotation = Interval{10, 400};
  const auto back = load_manifest(to_json(m).dump());
  ASSERT_EQ(back.files.size(), m.files.size());
  for (std::size_t i = 0; i < m.files.size(); ++i) EXPECT_EQ(back.files[i], m.files[i]);
}

TEST(Names, ClassAndSideStrings) {
  for (std::size_t i = 0; i < kNumClasses; ++i) EXPECT_EQ(parse_exercise(kClassNames[i]), kAllClasses[i]);
  EXPECT_FALSE(parse_exercise("abd").has_value());
  EXPECT_EQ(parse_side("L"), Side::LEFT);
  EXPECT_EQ(parse_side("R"), Side::RIGHT);
  EXPECT_FALSE(parse_side("left").has_value());
}
