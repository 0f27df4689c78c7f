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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "compgen/dataset_store.hpp"
#include "compgen/experiment.hpp"
#include "compgen/rep_extract.hpp"
#include "compgen/split.hpp"

namespace compgen {

struct RunOptions {
  bool resume = true;
  int shard_index = 0;  // this process runs grid cells with index % shard_count == shard_index
  int shard_count = 1;
  std::string worker_id;  // names the per-process record file; default "w<shard_index>"
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

struct RunSummary {
  std::filesystem::path output_dir;
  std::string spec_hash;
  int completed = 0;
  int skipped = 0;  // already done (resume)
  int quarantined = 0;
  std::int64_t training_steps = 0;  // optimizer steps taken by this call
  std::int64_t records = 0;
};

/// Layout under the output directory:
///   spec.json, data/store/, data/split.json,
///   runs/<grid key>/seed_<s>/{train/, messages.jsonl, bundles/, DONE},
///   records/<worker>.jsonl, quarantine/<worker>.jsonl
RunSummary run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Cached store and split of an experiment (built on first use).
struct ExperimentData {
  DatasetStore store;
  SplitAssignment split;
};
ExperimentData prepare_data(const ExperimentSpec& spec, const std::filesystem::path& output_dir);

/// Readout records for one trained model: for each mode, readout kind and
/// N_label, a readout fitted on the labeled subset and scored on S-train,
/// US-train and Test.
std::vector<nlohmann::json> readout_records(const ExperimentSpec& spec, const FactorSpec& factors,
                                            const DatasetStore& store, const SplitAssignment& split,
                                            const std::vector<RepresentationBundle>& train_bundles,
                                            const std::vector<RepresentationBundle>& test_bundles,
                                            std::uint64_t seed);

/// Seed of the labeled subset drawn for a repeat seed and N_label.
std::uint64_t labeled_subset_seed(std::uint64_t seed, int n_label);

/// Metric report for one representation; topsim runs only when messages are
/// given (one per row of `bundle`).
MetricReport compute_metrics(const ExperimentSpec& spec, const FactorSpec& factors, const DatasetStore& store,
                             const RepresentationBundle& bundle,
                             const std::vector<std::vector<int>>* messages, std::uint64_t seed);

/// Problems found in an output directory (empty when consistent): store
/// checksum, split invariants, record provenance and subset tags.
std::vector<std::string> verify_output(const std::filesystem::path& output_dir);

}  // namespace compgen
