#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sarc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result sarc(const std::string& args) const {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" SARC_CLI_PATH "' " + args + " > '" + out.string() +
                            "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write_config(const std::string& name, const nlohmann::json& j) const {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  static nlohmann::json small_config(const std::string& output) {
    return {{"seed", 3},
            {"dataset", {{"synth", {{"n_subjects", 2}, {"reps_per_set", 4}, {"rest_padding", 2.0}}}}},
            {"segmentation", {{"window_seconds", 2.0}, {"overlap", 0.5}, {"folds", 2}}},
            {"classifiers", {{{"kind", "rf"}, {"trees", 10}, {"max_features", 0.2}}}},
            {"protocols", "both"},
            {"rank_trees", 20},
            {"plots", false},
            {"save_models", false},
            {"output", output}};
  }

  fs::path dir_;
};

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_F(Cli, HelpExitsCleanly) {
  const auto r = sarc("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("evaluate"), std::string::npos);
}

TEST_F(Cli, UnknownFlagIsAValidationError) {
  EXPECT_EQ(sarc("run --no-such-flag").code, 2);
  EXPECT_EQ(sarc("").code, 2);
}

TEST_F(Cli, MissingManifestIsAnIoError) {
  const auto r = sarc("run --manifest nowhere/manifest.json --seed 1 --out out");
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_NE(r.err.find("nowhere"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, MalformedConfigIsAValidationError) {
  std::ofstream(dir_ / "bad.json") << "{\"seed\": 1,";
  EXPECT_EQ(sarc("run --config bad.json").code, 2);
  write_config("neg.json", {{"seed", 1}, {"feature_fraction", -0.5}, {"output", "o"}});
  EXPECT_EQ(sarc("run --config neg.json").code, 2);
}

TEST_F(Cli, StageByStageChain) {
  auto r = sarc("synth --out data --seed 4 --subjects 1 --reps 4");
  ASSERT_EQ(r.code, 0) << r.err;
  r = sarc("ingest --manifest data/manifest.json --summary summary.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("14 recordings"), std::string::npos) << r.out;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "summary.json")).size(), 14u);

  r = sarc("annotate --manifest data/manifest.json --out annotated.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(slurp(dir_ / "annotated.json"));
  for (const auto& f : m.at("files")) EXPECT_TRUE(f.contains("annotation")) << f.dump();

  r = sarc("segment --manifest annotated.json --out win --overlap 0.5");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "win.bin"));
  EXPECT_TRUE(fs::exists(dir_ / "win.json"));

  r = sarc("featurize --windows win --out feats.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "feats.csv");
  EXPECT_NE(csv.substr(0, csv.find('\n')).find("ax.mean"), std::string::npos);

  r = sarc("rank --windows win --out ranking.csv --trees 20 --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ranking = slurp(dir_ / "ranking.csv");
  EXPECT_EQ(ranking.substr(0, ranking.find('\n')), "feature,importance,std");
  EXPECT_EQ(lines(ranking), 134u);

  r = sarc("train --windows win --classifier rf --trees 10 --seed 2 --out rf.sarcmdl");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("training accuracy"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "rf.sarcmdl"));
}

TEST_F(Cli, ShortWindowsRejectTheDefaultCrnn) {
  ASSERT_EQ(sarc("synth --out data --seed 4 --subjects 1 --reps 3").code, 0);
  ASSERT_EQ(sarc("annotate --manifest data/manifest.json --out a.json").code, 0);
  ASSERT_EQ(sarc("segment --manifest a.json --out win --window-seconds 0.4").code, 0);
  const auto r = sarc("train --windows win --classifier crnn --seed 1 --out m.sarcmdl");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("pooling in block 2"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "m.sarcmdl"));
}

TEST_F(Cli, FailedRunLeavesNoPartialOutput) {
  auto cfg = small_config("out");
  cfg["segmentation"]["window_seconds"] = 0.4;
  cfg["classifiers"] = {{{"kind", "crnn"}, {"epochs", 1}}};
  cfg["protocols"] = "temporal";
  write_config("run.json", cfg);
  const auto r = sarc("run --config run.json");
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
  EXPECT_FALSE(fs::exists(dir_ / ".out.partial"));
}

TEST_F(Cli, RunIsDeterministicAndCoversBothProtocols) {
  write_config("run.json", small_config("out"));
  auto r = sarc("run --config run.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto head = r.out.substr(0, r.out.find('\n'));
  EXPECT_EQ(head.rfind("Classifier  Training ", 0), 0u) << head;
  EXPECT_TRUE(head.ends_with("Temporal Validation  Subject Validation  Train Time [s]  Score Time [s]")) << head;
  const auto report = nlohmann::json::parse(slurp(dir_ / "out" / "report.json"));
  ASSERT_EQ(report.at("protocols").size(), 2u);
  EXPECT_EQ(report["protocols"][0]["protocol"], "temporal");
  EXPECT_EQ(report["protocols"][1]["protocol"], "subject");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "run_manifest.json"));
  EXPECT_EQ(lines(slurp(dir_ / "out" / "report.csv")), 3u);

  const auto first = slurp(dir_ / "out" / "report.json");
  write_config("run2.json", small_config("out2"));
  ASSERT_EQ(sarc("--threads 2 run --config run2.json").code, 0);
  EXPECT_EQ(slurp(dir_ / "out2" / "report.json"), first);

  r = sarc("report --report out/report.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Subject Validation"), std::string::npos);
}

TEST_F(Cli, FlagsOverrideConfig) {
  write_config("run.json", small_config("out"));
  const auto r = sarc("run --config run.json --protocol temporal --out other");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
  const auto report = nlohmann::json::parse(slurp(dir_ / "other" / "report.json"));
  EXPECT_EQ(report.at("protocols").size(), 1u);
}

TEST_F(Cli, OverlapSweepWritesOneRowPerValue) {
  write_config("run.json", small_config("unused"));
  const auto r = sarc(
      "sweep --config run.json --protocol temporal --axis overlap --values 0,0.5,0.75,0.9,0.95 --out curve.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "curve.csv");
  EXPECT_EQ(lines(csv), 6u) << csv;
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "overlap,valid_mean,valid_std,train_mean");
  EXPECT_EQ(sarc("sweep --config run.json --axis overlap --values 0,x --out c.csv").code, 2);
}
