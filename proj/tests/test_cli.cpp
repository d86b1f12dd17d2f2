// Copyright 2026 The binomark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace binomark::cli {
namespace {

namespace fs = std::filesystem;

const std::string kKey(64, 'c');

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "binomark");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  Result r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<Json> json_lines(const std::string& text) {
  std::vector<Json> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    if (!line.empty()) lines.push_back(Json::parse(line));
  }
  return lines;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  return lines;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("binomark_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

  std::string config(double delta, std::size_t tokens = 150, int seed = 5) {
    return write("cfg" + std::to_string(seed) + ".json",
                 R"({"key":")" + kKey + R"(","message_bits":8,"tokens":)" + std::to_string(tokens) +
                     R"(,"seed":)" + std::to_string(seed) +
                     R"(,"lm":{"vocab_size":512},"scheme":{"kind":"red_green","delta":)" + std::to_string(delta) + "}}");
  }

  fs::path dir_;
};

TEST_F(CliTest, GenerateIsByteIdenticalAcrossRuns) {
  const std::string cfg = config(2.0);
  const Result a = invoke({"generate", "-c", cfg, "-n", "1"});
  const Result b = invoke({"generate", "-c", cfg, "-n", "1", "-j", "3"});
  ASSERT_EQ(a.code, kSuccess) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto lines = json_lines(a.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0]["type"], "header");
  EXPECT_EQ(lines[1]["schema_version"], 1);
  EXPECT_EQ(a.out.find(kKey), std::string::npos);
  EXPECT_EQ(a.err.find(kKey), std::string::npos);
}

TEST_F(CliTest, SeedFlagOverridesConfig) {
  const Result base = invoke({"generate", "-c", config(2.0)});
  const Result other = invoke({"generate", "-c", config(2.0), "--seed", "6"});
  const Result direct = invoke({"generate", "-c", config(2.0, 150, 6)});
  EXPECT_NE(base.out, other.out);
  EXPECT_EQ(other.out, direct.out);
}

TEST_F(CliTest, MissingKeyIsAUsageError) {
  const std::string cfg = write("nokey.json", R"({"message_bits":8})");
  const Result r = invoke({"generate", "-c", cfg});
  EXPECT_EQ(r.code, kUsageError);
  EXPECT_NE(r.err.find("key"), std::string::npos);
}

TEST_F(CliTest, UnknownConfigFieldAndFlag) {
  const std::string cfg = write("bad.json", R"({"key":")" + kKey + R"(","mesage_bits":8})");
  const Result r = invoke({"generate", "-c", cfg});
  EXPECT_EQ(r.code, kUsageError);
  EXPECT_NE(r.err.find("mesage_bits"), std::string::npos);
  EXPECT_EQ(invoke({"generate", "--frobnicate"}).code, kUsageError);
  EXPECT_EQ(invoke({}).code, kUsageError);
}

TEST_F(CliTest, HelpListsFlags) {
  const Result r = invoke({"generate", "--help"});
  EXPECT_EQ(r.code, kSuccess);
  for (const char* flag : {"--config", "--key", "--count", "--seed", "--jobs", "--output", "--tokens"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
}

TEST_F(CliTest, CountZeroGivesEmptyOutput) {
  const Result r = invoke({"generate", "-c", config(2.0), "-n", "0"});
  EXPECT_EQ(r.code, kSuccess);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, KeyFromFile) {
  const std::string key_file = write("key.txt", kKey + "\n");
  const std::string cfg = write("k.json", R"({"key":"key.txt","message_bits":8,"tokens":20,"lm":{"vocab_size":64}})");
  EXPECT_EQ(invoke({"generate", "-c", cfg}).code, kSuccess);
  const std::string cfg2 = write("k2.json", R"({"message_bits":8,"tokens":20,"lm":{"vocab_size":64}})");
  EXPECT_EQ(invoke({"generate", "-c", cfg2, "-k", key_file}).code, kSuccess);
  EXPECT_EQ(invoke({"generate", "-c", cfg2, "-k", "short"}).code, kUsageError);
}

TEST_F(CliTest, DecodeRecoversGeneratedMessages) {
  const std::string cfg = config(10.0, 200);
  const Result gen = invoke({"generate", "-c", cfg, "-n", "4"});
  ASSERT_EQ(gen.code, kSuccess);
  const Result dec = invoke({"decode", "-c", cfg, "-i", "-"}, gen.out);
  ASSERT_EQ(dec.code, kSuccess) << dec.err;
  const auto lines = json_lines(dec.out);
  ASSERT_EQ(lines.size(), 5u);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i]["type"], "detection_report");
    EXPECT_EQ(lines[i]["decoded"], lines[i]["embedded"]);
  }
  const Result det = invoke({"detect", "-c", cfg, "-i", "-"}, gen.out);
  for (const auto& j : json_lines(det.out)) {
    if (j["type"] == "zero_bit_report") {
      EXPECT_LT(j["pvalue"].get<double>(), 0.01);
    }
  }
}

TEST_F(CliTest, RawRandomTokensLookNull) {
  std::mt19937_64 rng(1);
  std::string text;
  for (int line = 0; line < 60; ++line) {
    for (int t = 0; t < 200; ++t) text += std::to_string(rng() % 1024) + " ";
    text += "\n";
  }
  const std::string file = write("raw.txt", text);
  const Result r = invoke({"decode", "-k", kKey, "-i", file, "-m", "16", "--vocab", "1024", "--mc-samples", "0"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  long total = 0, ok = 0;
  for (const auto& j : json_lines(r.out)) {
    if (j["type"] != "detection_report") continue;
    for (double p : j["per_bit_pvalues"]) {
      ++total;
      ok += p >= 0.01;
    }
  }
  EXPECT_EQ(total, 60 * 16);
  EXPECT_GE(static_cast<double>(ok) / total, 0.97);
}

TEST_F(CliTest, EmptyInputAndMalformedLines) {
  const std::string empty = write("empty.txt", "");
  const Result r = invoke({"decode", "-k", kKey, "-i", empty, "-m", "8", "--vocab", "64"});
  EXPECT_EQ(r.code, kSuccess);
  EXPECT_TRUE(r.out.empty());

  const std::string mixed = write("mixed.txt", "1 2 3 4\nnot tokens\n5 6 7\n");
  const Result m = invoke({"decode", "-k", kKey, "-i", mixed, "-m", "8", "--vocab", "64"});
  EXPECT_EQ(m.code, kSuccess);
  const auto lines = json_lines(m.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[2]["type"], "error");
  EXPECT_EQ(lines[2]["line"], 2);

  const std::string bad = write("bad.txt", "x y\n{broken\n");
  EXPECT_EQ(invoke({"decode", "-k", kKey, "-i", bad, "-m", "8", "--vocab", "64"}).code, kRuntimeFailure);
  EXPECT_EQ(invoke({"decode", "-i", bad, "-m", "8", "--vocab", "64"}).code, kUsageError);
}

TEST_F(CliTest, CalibratePerBit) {
  const Result r = invoke({"calibrate", "-n", "1000", "-m", "8", "--alphas", "0.01,0.05,0.1", "--seed", "3"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto lines = csv_lines(r.out);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[1], "alpha,empirical_fpr,ci_low,ci_high");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    double alpha = 0, fpr = 0;
    ASSERT_EQ(std::sscanf(lines[i].c_str(), "%lf,%lf", &alpha, &fpr), 2);
    EXPECT_LE(fpr, alpha + 3.0 * std::sqrt(alpha * (1 - alpha) / 8000.0)) << lines[i];
  }
}

TEST_F(CliTest, CalibrateEdges) {
  const Result one = invoke({"calibrate", "-n", "100", "--alphas", "1.0", "-t", "50"});
  ASSERT_EQ(one.code, kSuccess);
  EXPECT_EQ(csv_lines(one.out)[2].substr(0, 6), "1,1,0.");
  EXPECT_EQ(invoke({"calibrate", "-n", "50"}).code, kUsageError);
  EXPECT_EQ(invoke({"calibrate", "-n", "100", "--alphas", "0.1,0.01"}).code, kUsageError);
  EXPECT_EQ(invoke({"calibrate", "-n", "100", "--detector", "bogus"}).code, kUsageError);
}

TEST_F(CliTest, CalibrateZeroBitFromLm) {
  const Result r = invoke({"calibrate", "-n", "100", "--source", "lm", "--detector", "zero_bit", "-t", "60",
                           "--mc-samples", "500", "--alphas", "0.5,1"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_EQ(csv_lines(r.out).size(), 4u);
}

TEST_F(CliTest, AttackZeroThenEvalMatchesUnattacked) {
  const std::string cfg = config(2.0, 120);
  const Result gen = invoke({"generate", "-c", cfg, "-n", "6"});
  const std::string records = write("records.jsonl", gen.out);
  const Result att = invoke({"attack", "-i", records, "--kind", "delete", "-f", "0"});
  ASSERT_EQ(att.code, kSuccess) << att.err;
  const auto attacked = json_lines(att.out);
  ASSERT_EQ(attacked.size(), 7u);
  EXPECT_EQ(attacked[1]["attacks"].size(), 1u);
  const Result e1 = invoke({"eval", "-i", records, "-k", kKey, "--mc-samples", "1000"});
  const Result e2 = invoke({"eval", "-i", "-", "-k", kKey, "--mc-samples", "1000"}, att.out);
  ASSERT_EQ(e1.code, kSuccess) << e1.err;
  ASSERT_EQ(e2.code, kSuccess) << e2.err;
  auto strip_fingerprint = [](std::string row) {
    const auto a = row.find(',');
    const auto b = row.find(',', a + 1);
    return row.erase(a, b - a);
  };
  EXPECT_EQ(strip_fingerprint(csv_lines(e1.out)[2]), strip_fingerprint(csv_lines(e2.out)[2]));

  const Result sub = invoke({"attack", "-i", records, "--kind", "substitute", "-f", "0.5", "--seed", "2"});
  ASSERT_EQ(sub.code, kSuccess);
  EXPECT_NE(json_lines(sub.out)[1]["tokens"], json_lines(gen.out)[1]["tokens"]);
  EXPECT_EQ(invoke({"attack", "-i", records, "--kind", "shuffle", "-f", "0.1"}).code, kUsageError);
}

TEST_F(CliTest, EvalMixedCorpusReportsTprAndFpr) {
  const Result wm = invoke({"generate", "-c", config(3.0, 120), "-n", "5"});
  const std::string null_cfg =
      write("null.json", R"({"key":")" + kKey + R"(","message_bits":8,"tokens":120,"seed":9,"lm":{"vocab_size":512},"scheme":{"kind":"none"}})");
  const Result nul = invoke({"generate", "-c", null_cfg, "-n", "5"});
  const Result ev = invoke({"eval", "-i", "-", "-k", kKey, "--mc-samples", "1000"}, wm.out + nul.out);
  ASSERT_EQ(ev.code, kSuccess) << ev.err;
  const auto lines = csv_lines(ev.out);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "# binomark-metrics v1");
  EXPECT_NE(lines[1].find("tpr_at_fpr_0.01"), std::string::npos);
  EXPECT_NE(lines[1].find("fpr_at_0.01"), std::string::npos);
  EXPECT_EQ(lines[2].find("nan"), std::string::npos) << lines[2];
}

TEST_F(CliTest, EvalSweepConfig) {
  const std::string sweep = write("sweep.json", R"({
    "seed": 4,
    "base": {"name": "del", "message_bits": 8, "tokens": 100, "samples": 4, "lm": {"vocab_size": 256},
             "decode": {"mc_samples": 500}, "attack": {"kind": "delete", "fraction": 0.1}},
    "axes": [{"path": "/attack/fraction", "values": [0.1, 0.2, 0.3, 0.4, 0.5]}]
  })");
  const Result r = invoke({"eval", "-c", sweep});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto lines = csv_lines(r.out);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "# binomark-metrics v1");
  for (std::size_t i = 2; i < lines.size(); ++i) EXPECT_EQ(lines[i].back(), ',') << lines[i];  // empty error column
  EXPECT_EQ(invoke({"eval"}).code, kUsageError);
}

}  // namespace
}  // namespace binomark::cli
