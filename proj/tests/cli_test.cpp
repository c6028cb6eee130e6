// Copyright 2026 The s3nmf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "../tools/commands.hpp"
#include "s3nmf/io.hpp"

namespace s3nmf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kIris = S3NMF_TEST_DATA_DIR "/iris.csv";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / "s3nmf_cli_test" / info->name();
  fs::create_directories(dir);
  return dir / name;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

// Writes a labelled dataset, optionally replacing the labels.
fs::path write_dataset(const Dataset& d, const std::string& name, const std::vector<int>* labels = nullptr) {
  const fs::path p = scratch(name);
  std::ofstream f(p);
  for (Index i = 0; i < d.data.samples(); ++i) {
    for (Index j = 0; j < d.data.features(); ++j) f << format_double(d.data.values()(i, j)) << ",";
    f << (labels ? (*labels)[static_cast<std::size_t>(i)] : (*d.labels)[static_cast<std::size_t>(i)]) << "\n";
  }
  return p;
}

TEST(Cli, HelpAndBadFlags) {
  EXPECT_EQ(cli({"--help"}).code, cli::kOk);
  EXPECT_EQ(cli({"run", kIris, "--bogus"}).code, cli::kInputError);
  EXPECT_EQ(cli({"run", kIris, "--mode", "fuzzy"}).code, cli::kInputError);
}

TEST(Cli, RunIrisReportsMemberMean) {
  const fs::path out = scratch("iris.json");
  const Outcome r = cli({"run", kIris, "--out", out.string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const json doc = read_json(out);
  ASSERT_EQ(doc["metrics"]["members"].size(), 20u);
  double sum = 0.0;
  for (const json& m : doc["metrics"]["members"]) sum += m["acc"].get<double>();
  EXPECT_NEAR(doc["metrics"]["summary"]["mean"]["acc"].get<double>(), sum / 20.0, 1e-12);
  EXPECT_EQ(doc["manifest"]["pipeline"]["c"], 3);
  EXPECT_TRUE(doc.contains("timing"));
}

TEST(Cli, MissingClustersOnUnlabeledData) {
  const Outcome r = cli({"run", kIris, "--label-column", "none", "--max-outer", "1"});
  EXPECT_EQ(r.code, cli::kInputError);
  EXPECT_NE(r.err.find("--clusters"), std::string::npos) << r.err;
}

TEST(Cli, MissingFileIsIoError) {
  EXPECT_EQ(cli({"run", scratch("nope.csv").string()}).code, cli::kIoError);
}

TEST(Cli, SameSeedSameFile) {
  const fs::path a = scratch("a.json");
  const fs::path b = scratch("b.json");
  for (const fs::path& p : {a, b}) {
    ASSERT_EQ(cli({"run", kIris, "--seed", "9", "-b", "8", "--out", p.string()}).code, cli::kOk);
  }
  json ja = read_json(a), jb = read_json(b);
  ja.erase("timing");
  jb.erase("timing");
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(Cli, LabelsNeverReachThePipeline) {
  const Dataset iris = load_dataset(kIris, LabelColumn::last());
  std::vector<int> corrupted(150);
  for (int i = 0; i < 150; ++i) corrupted[static_cast<std::size_t>(i)] = (i * 7) % 3;
  const fs::path clean = write_dataset(iris, "clean.csv");
  const fs::path dirty = write_dataset(iris, "dirty.csv", &corrupted);
  const fs::path a = scratch("a.json");
  const fs::path b = scratch("b.json");
  ASSERT_EQ(cli({"run", clean.string(), "-b", "6", "--out", a.string()}).code, cli::kOk);
  ASSERT_EQ(cli({"run", dirty.string(), "-b", "6", "--out", b.string()}).code, cli::kOk);
  const json ja = read_json(a), jb = read_json(b);
  EXPECT_EQ(ja["partitions"], jb["partitions"]);
  EXPECT_EQ(ja["anmi_trace"], jb["anmi_trace"]);
  EXPECT_NE(ja["metrics"], jb["metrics"]);
}

TEST(Cli, AffinityFileRoundTrip) {
  const fs::path w = scratch("w.csv");
  ASSERT_EQ(cli({"affinity", kIris, "--out", w.string()}).code, cli::kOk);
  const fs::path a = scratch("a.json");
  const fs::path b = scratch("b.json");
  ASSERT_EQ(cli({"run", kIris, "-b", "5", "--out", a.string()}).code, cli::kOk);
  ASSERT_EQ(cli({"run", kIris, "-b", "5", "--affinity-in", w.string(), "--out", b.string()}).code, cli::kOk);
  EXPECT_EQ(read_json(a)["partitions"], read_json(b)["partitions"]);
}

TEST(Cli, ManifestReplay) {
  const fs::path a = scratch("a.json");
  const fs::path b = scratch("b.json");
  ASSERT_EQ(cli({"run", kIris, "-b", "6", "--tau", "3", "--seed", "4", "--out", a.string()}).code, cli::kOk);
  ASSERT_EQ(cli({"run", kIris, "--manifest", a.string(), "--out", b.string()}).code, cli::kOk);
  json ja = read_json(a), jb = read_json(b);
  ja.erase("timing");
  jb.erase("timing");
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(Cli, EnvironmentOverride) {
  ::setenv("S3NMF_ENSEMBLE", "3", 1);
  const fs::path a = scratch("a.json");
  const Outcome r = cli({"run", kIris, "--max-outer", "1", "--out", a.string()});
  ::unsetenv("S3NMF_ENSEMBLE");
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(read_json(a)["manifest"]["pipeline"]["b"], 3);
}

TEST(Cli, EvalFromResults) {
  const fs::path a = scratch("a.json");
  ASSERT_EQ(cli({"run", kIris, "-b", "4", "--out", a.string()}).code, cli::kOk);
  const fs::path e = scratch("e.json");
  ASSERT_EQ(cli({"eval", kIris, "--results", a.string(), "--out", e.string()}).code, cli::kOk);
  EXPECT_EQ(read_json(e)["summary"]["mean"], read_json(a)["metrics"]["summary"]["mean"]);
}

TEST(Cli, AblateTable) {
  const fs::path data = write_dataset(make_blobs(BlobSpec{}), "blobs.csv");
  const fs::path a = scratch("a.json");
  const fs::path b = scratch("b.json");
  ASSERT_EQ(cli({"ablate", data.string(), "-b", "6", "--out", a.string()}).code, cli::kOk);
  ASSERT_EQ(cli({"ablate", data.string(), "-b", "6", "--out", b.string()}).code, cli::kOk);
  const json ja = read_json(a), jb = read_json(b);
  ASSERT_EQ(ja["rows"].size(), 4u);
  for (const json& row : ja["rows"]) EXPECT_EQ(row["summary"]["mean"].size(), 5u);
  EXPECT_EQ(ja["rows"][0]["method"], "SNMF");
  EXPECT_EQ(ja["rows"][0], jb["rows"][0]);
}

TEST(Cli, CertifyDefault) {
  const Outcome r = cli({"certify"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("50/50 instances certified"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("200/200"), std::string::npos) << r.out;
}

TEST(Cli, CertifyInstanceCount) {
  const Outcome r = cli({"certify", "--instances", "5"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("5/5 instances certified"), std::string::npos) << r.out;
}

TEST(Cli, CertifyInjectedFault) {
  const fs::path replay = scratch("replay.json");
  const Outcome r = cli({"certify", "--instances", "5", "--inject-fault", "--out", replay.string()});
  EXPECT_EQ(r.code, cli::kNumericError);
  const json doc = read_json(replay);
  EXPECT_TRUE(doc["replay"].contains("S"));
  EXPECT_TRUE(doc["replay"].contains("V_next"));
}

TEST(Cli, BenchScaling) {
  const fs::path a = scratch("a.json");
  const Outcome r = cli({"bench", "--scaling", "--scaling-base", "60", "--scaling-steps", "2", "--out", a.string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const json doc = read_json(a);
  ASSERT_EQ(doc["scaling"].size(), 2u);
  EXPECT_GT(doc["scaling"][1]["ratio"].get<double>(), 0.0);
}

}  // namespace
}  // namespace s3nmf
