/*
 * Copyright 2026 The stforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "stforge/cli.hpp"
#include "support/test_support.hpp"

namespace stforge::cli {
namespace {

namespace fs = std::filesystem;
using stforge::testing::slurp;
using stforge::testing::spit;
using stforge::testing::TempDir;

struct Outcome {
  int rc;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "stforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int rc = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {rc, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return (stforge::testing::data_dir() / "fixtures" / name).string(); }

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).rc, kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).rc, kExitUsage);
  EXPECT_EQ(run_cli({"funnel", "--corpus", "a", "--embeddings", "b", "--bogus"}).rc, kExitUsage);
  EXPECT_EQ(run_cli({"funnel", "--embeddings", "b"}).rc, kExitUsage);
  EXPECT_EQ(run_cli({"rl-eval", "--trajectories", "a", "--rewards", "b", "--mode", "ppo"}).rc, kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).rc, kExitOk);
}

TEST(Cli, MissingInputIsIoError) {
  TempDir tmp;
  const auto r = run_cli({"funnel", "--corpus", (tmp / "none.jsonl").string(), "--embeddings",
                          (tmp / "none.stfe").string(), "--out", (tmp / "o").string()});
  EXPECT_EQ(r.rc, kExitIo);
  EXPECT_NE(r.err.find("IoError"), std::string::npos) << r.err;
}

TEST(Cli, ValidationErrors) {
  TempDir tmp;
  const auto r = run_cli({"funnel", "--corpus", fixture("corpus.jsonl"), "--embeddings", fixture("embeddings.stfe"),
                          "--dry-run", "--bands", "7"});
  EXPECT_EQ(r.rc, kExitValidation);
  EXPECT_NE(r.err.find("InvalidConfig"), std::string::npos) << r.err;
  spit(tmp / "bad.jsonl", "{\"query_id\":\"q1\",\"rewards\":[0.5,2.0]}\n");
  const auto p = run_cli({"probe-select", "--rewards", (tmp / "bad.jsonl").string()});
  EXPECT_EQ(p.rc, kExitValidation);
  spit(tmp / "ratings.jsonl", "{\"query_id\":\"q1\",\"scenario\":\"A\",\"ratings\":[1,1],\"H\":false}\n");
  EXPECT_EQ(run_cli({"reward-score", "--ratings", (tmp / "ratings.jsonl").string()}).rc, kExitValidation);
}

TEST(Cli, DryRunWritesNothing) {
  TempDir tmp;
  const auto out = tmp / "funnel";
  const auto r = run_cli({"funnel", "--corpus", fixture("corpus.jsonl"), "--embeddings", fixture("embeddings.stfe"),
                          "--out", out.string(), "--dry-run", "--kcenter-target", "800"});
  ASSERT_EQ(r.rc, kExitOk) << r.err;
  EXPECT_FALSE(fs::exists(out));
  EXPECT_NE(r.out.find("after_geometric 800"), std::string::npos) << r.out;
}

TEST(Cli, FunnelWritesOutputs) {
  TempDir tmp;
  const auto out = tmp / "funnel";
  const auto r = run_cli({"funnel", "--corpus", fixture("corpus.jsonl"), "--embeddings", fixture("embeddings.stfe"),
                          "--out", out.string(), "--kcenter-target", "800", "--threads", "2"});
  ASSERT_EQ(r.rc, kExitOk) << r.err;
  for (const char* f : {"survivors.txt", "curated.jsonl", "drop_log.jsonl", "summary.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary.at("after_geometric"), 800);
  EXPECT_EQ(summary.at("config").at("num_hashes"), 256);
  const auto corpus = read_corpus(out / "curated.jsonl");
  EXPECT_EQ(corpus.size(), 800u);
  // The drop log and the survivors partition the input.
  std::size_t dropped = 0;
  for (const auto& line : read_lines(out / "drop_log.jsonl")) {
    if (!line.empty()) dropped += nlohmann::json::parse(line).at("dropped").size();
  }
  EXPECT_EQ(dropped + corpus.size(), summary.at("input").get<std::size_t>());
}

TEST(Cli, ConfigFileSuppliesOptions) {
  TempDir tmp;
  spit(tmp / "run.ini", "[funnel]\ncorpus=" + fixture("corpus.jsonl") + "\nembeddings=" + fixture("embeddings.stfe") +
                           "\nkcenter-target=500\ndry-run=true\n");
  const auto r = run_cli({"--config", (tmp / "run.ini").string(), "funnel"});
  ASSERT_EQ(r.rc, kExitOk) << r.err;
  EXPECT_NE(r.out.find("after_geometric 500"), std::string::npos) << r.out;
  // Flags override the file.
  const auto o = run_cli({"--config", (tmp / "run.ini").string(), "funnel", "--kcenter-target", "300"});
  EXPECT_NE(o.out.find("after_geometric 300"), std::string::npos) << o.out;
}

TEST(Cli, ProbeSelectAndSchedule) {
  TempDir tmp;
  const auto r = run_cli({"probe-select", "--rewards", fixture("probe_rewards.jsonl"), "--out",
                          (tmp / "records.jsonl").string()});
  ASSERT_EQ(r.rc, kExitOk) << r.err;
  EXPECT_NE(r.out.find("learnable "), std::string::npos);
  const auto records = read_lines(tmp / "records.jsonl");
  ASSERT_FALSE(records.empty());
  EXPECT_TRUE(nlohmann::json::parse(records[0]).contains("budget"));

  const auto s = run_cli({"schedule", "--corpus", fixture("corpus.jsonl"), "--schedule", fixture("schedule.json"),
                          "--out", (tmp / "batches.jsonl").string(), "--histogram", (tmp / "hist.csv").string()});
  ASSERT_EQ(s.rc, kExitOk) << s.err;
  EXPECT_NE(s.out.find("phases 3"), std::string::npos) << s.out;
  EXPECT_EQ(slurp(tmp / "hist.csv").rfind("intent,difficulty,count\n", 0), 0u);
  const auto again = run_cli({"schedule", "--corpus", fixture("corpus.jsonl"), "--schedule", fixture("schedule.json"),
                              "--out", (tmp / "batches2.jsonl").string()});
  EXPECT_EQ(slurp(tmp / "batches.jsonl"), slurp(tmp / "batches2.jsonl"));
  const auto tiny = run_cli({"schedule", "--corpus", fixture("corpus.jsonl"), "--tiny-fraction", "0.1",
                             "--batch-size", "10", "--seed", "3"});
  ASSERT_EQ(tiny.rc, kExitOk) << tiny.err;
  EXPECT_NE(tiny.out.find("phases 1"), std::string::npos);
  EXPECT_EQ(run_cli({"schedule", "--corpus", fixture("corpus.jsonl")}).rc, kExitValidation);
}

TEST(Cli, RewardScoreBothSources) {
  TempDir tmp;
  const auto r = run_cli({"reward-score", "--ratings", fixture("ratings.jsonl"), "--corpus", fixture("corpus.jsonl"),
                          "--out", (tmp / "scored.jsonl").string()});
  ASSERT_EQ(r.rc, kExitOk) << r.err;
  EXPECT_NE(r.out.find("scored 60"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("vetoed 12"), std::string::npos) << r.out;
  for (const auto& line : read_lines(tmp / "scored.jsonl")) {
    const auto j = nlohmann::json::parse(line);
    if (j.at("H").get<bool>()) {
      EXPECT_EQ(j.at("R").get<double>(), 0.0);
    }
  }
  // Without the corpus the fallback records have no scenario.
  EXPECT_EQ(run_cli({"reward-score", "--ratings", fixture("ratings.jsonl")}).rc, kExitValidation);

  const auto x = run_cli({"reward-score", "--reports", fixture("reports")});
  ASSERT_EQ(x.rc, kExitOk) << x.err;
  EXPECT_NE(x.out.find("scored 4"), std::string::npos) << x.out;
  EXPECT_NE(x.out.find("vetoed 1"), std::string::npos) << x.out;
  EXPECT_EQ(run_cli({"reward-score", "--reports", (tmp / "nowhere").string()}).rc, kExitIo);
}

TEST(Cli, RlEvalModes) {
  TempDir tmp;
  for (const char* mode : {"token_grpo", "sequence_gspo"}) {
    const auto out = tmp / (std::string(mode) + ".json");
    const auto r = run_cli({"rl-eval", "--trajectories", fixture("trajectories.jsonl"), "--rewards",
                            fixture("rl_rewards.jsonl"), "--mode", mode, "--out", out.string()});
    ASSERT_EQ(r.rc, kExitOk) << r.err;
    const auto j = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(j.at("mode"), mode);
    EXPECT_EQ(j.at("G"), 4);
    EXPECT_GE(j.at("clip_fraction").get<double>(), 0.0);
    EXPECT_LE(j.at("clip_fraction").get<double>(), 1.0);
    EXPECT_GE(j.at("mean_kl").get<double>(), 0.0);
  }
}

TEST(Cli, ServeExportOnly) {
  TempDir tmp;
  const auto a = run_cli({"serve", "--seed", "5", "--pois", "50", "--snapshot", (tmp / "a.json").string(),
                          "--export-only"});
  ASSERT_EQ(a.rc, kExitOk) << a.err;
  run_cli({"serve", "--seed", "5", "--pois", "50", "--snapshot", (tmp / "b.json").string(), "--export-only"});
  EXPECT_EQ(slurp(tmp / "a.json"), slurp(tmp / "b.json"));
  EXPECT_EQ(run_cli({"serve", "--export-only"}).rc, kExitValidation);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = STFORGE_BINARY;
  const auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(bin + " --help"), kExitOk);
  EXPECT_EQ(status(bin + " funnel --nope"), kExitUsage);
  EXPECT_EQ(status(bin + " probe-select --rewards /nonexistent/p.jsonl"), kExitIo);
}

}  // namespace
}  // namespace stforge::cli
