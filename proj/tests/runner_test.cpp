// Copyright 2026 The compgen Authors.
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

#include "compgen/runner.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "compgen/error.hpp"
#include "compgen/results.hpp"

namespace compgen {
namespace {

namespace fs = std::filesystem;

// Two grid points, one seed, 32x32 desk images, a handful of steps.
ExperimentSpec tiny_spec(const fs::path& out) {
  auto spec = ExperimentSpec::from_json(nlohmann::json::parse(R"({
    "name": "tiny",
    "dataset": {"name": "desk", "resolution": 32},
    "split": {"ratio": 0.3, "seed": 5},
    "models": {"width_multiplier": 1, "latent_dim": 4,
               "beta_vae": {"betas": [1]},
               "el": {"n_msg": [3], "n_vocab": [8], "variants": ["el"]}},
    "train": {"steps": 4, "batch_size": 8, "loss_log_every": 2},
    "readout": {"n_labels": [50], "kinds": ["linear"], "modes": ["latent", "post"]},
    "metrics": {"enabled": ["mig", "dci", "topsim"], "modes": ["latent"]},
    "seeds": [0]
  })"));
  spec.output_dir = out.string();
  return spec;
}

// Records without fields that legitimately differ between two runs.
std::vector<nlohmann::json> comparable(std::vector<nlohmann::json> records) {
  for (auto& r : records) {
    r.erase("wall_clock_s");
    r.erase("artifacts");
  }
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return record_identity(a) < record_identity(b); });
  return records;
}

class RunnerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / "compgen_runner_test";
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  fs::path root_;
};

TEST_F(RunnerTest, RunResumeAndVerify) {
  const auto spec = tiny_spec(root_ / "a");
  const auto first = run_experiment(spec);
  EXPECT_EQ(first.completed, 2);
  EXPECT_EQ(first.quarantined, 0);
  EXPECT_EQ(first.training_steps, 8);
  // readout: 2 modes x 1 N_label x 1 kind x 3 subsets; metrics: 1 mode
  EXPECT_EQ(first.records, 2 * (6 + 1));
  EXPECT_EQ(first.spec_hash, spec.hash());
  EXPECT_TRUE(verify_output(root_ / "a").empty());

  const auto records = load_records(root_ / "a" / "records");
  ASSERT_EQ(records.size(), 14u);
  std::set<std::string> subsets;
  for (const auto& r : records) {
    subsets.insert(r.at("subset").get<std::string>());
    EXPECT_EQ(r.at("spec_hash"), spec.hash());
    if (r.at("kind") == "metrics") {
      EXPECT_EQ(r.at("report").contains("topsim_defined"), r.at("coords").at("family") == "el");
    }
  }
  EXPECT_EQ(subsets, (std::set<std::string>{kSubsetSTrain, kSubsetUSTrain, kSubsetTest}));
  EXPECT_TRUE(fs::exists(root_ / "a" / "runs" / "el-m3-v8" / "seed_0" / "messages.jsonl"));

  const auto again = run_experiment(spec);
  EXPECT_EQ(again.skipped, 2);
  EXPECT_EQ(again.completed, 0);
  EXPECT_EQ(again.training_steps, 0);
  EXPECT_EQ(load_records(root_ / "a" / "records").size(), 14u);

  // Same spec in a fresh directory reproduces every value.
  const auto fresh = run_experiment(tiny_spec(root_ / "b"));
  EXPECT_EQ(fresh.completed, 2);
  EXPECT_EQ(comparable(load_records(root_ / "b" / "records")), comparable(records));

  // A changed spec invalidates the cached cells.
  auto changed = spec;
  changed.train.steps = 6;
  const auto rerun = run_experiment(changed);
  EXPECT_EQ(rerun.skipped, 0);
  EXPECT_EQ(rerun.training_steps, 12);
}

TEST_F(RunnerTest, VerifyFlagsTamperedRecords) {
  run_experiment(tiny_spec(root_));
  const auto file = root_ / "records" / "w0.jsonl";
  std::vector<nlohmann::json> records;
  {
    std::ifstream in(file);
    for (std::string line; std::getline(in, line);) records.push_back(nlohmann::json::parse(line));
  }
  for (auto& r : records) {
    if (r.at("subset") == kSubsetTest && r.at("kind") == "readout") {
      r["report"]["metadata"]["n_eval"] = 10;
      break;
    }
  }
  records.back()["split_ref"] = "0000";
  fs::remove(file);
  append_jsonl(file, records);
  const auto problems = verify_output(root_);
  ASSERT_EQ(problems.size(), 2u);
  EXPECT_NE(problems[0].find("expected"), std::string::npos);
  EXPECT_NE(problems[1].find("split_ref"), std::string::npos);
}

TEST_F(RunnerTest, ShardsPartitionTheGrid) {
  const auto spec = tiny_spec(root_);
  RunOptions a;
  a.shard_count = 2;
  RunOptions b = a;
  b.shard_index = 1;
  EXPECT_EQ(run_experiment(spec, a).completed, 1);
  EXPECT_EQ(run_experiment(spec, b).completed, 1);
  EXPECT_TRUE(fs::exists(root_ / "records" / "w0.jsonl"));
  EXPECT_TRUE(fs::exists(root_ / "records" / "w1.jsonl"));
  EXPECT_EQ(load_records(root_ / "records").size(), 14u);
  EXPECT_EQ(run_experiment(spec).skipped, 2);
}

TEST_F(RunnerTest, FailingCellIsQuarantined) {
  auto spec = tiny_spec(root_);
  spec.el_n_msg.clear();
  spec.n_labels = {5000};  // more than the train split holds
  const auto summary = run_experiment(spec);
  EXPECT_EQ(summary.quarantined, 1);
  EXPECT_EQ(summary.completed, 0);
  EXPECT_FALSE(fs::exists(root_ / "runs" / "beta_vae-b1" / "seed_0" / "DONE"));
  std::ifstream in(root_ / "quarantine" / "w0.jsonl");
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  const auto q = nlohmann::json::parse(line);
  EXPECT_EQ(q.at("grid_key"), "beta_vae-b1");
  EXPECT_EQ(q.at("stage"), "readout");
  EXPECT_EQ(q.at("spec_hash"), spec.hash());
  // not DONE, so a retry trains again
  EXPECT_EQ(run_experiment(spec).training_steps, 4);
}

}  // namespace
}  // namespace compgen
