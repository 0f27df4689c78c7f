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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace compgen {

/// Evaluation subsets: the labeled readout-training rows, the whole
/// unsupervised training split, and the held-out compositional test split.
inline constexpr const char* kSubsetSTrain = "S-train";
inline constexpr const char* kSubsetUSTrain = "US-train";
inline constexpr const char* kSubsetTest = "Test";

/// Reads every *.jsonl file under `dir` (sorted by name). Later records with
/// the same identity replace earlier ones.
std::vector<nlohmann::json> load_records(const std::filesystem::path& dir);

/// Identity of a record: spec hash, grid key, seed, kind, subset, mode,
/// readout, n_label.
std::string record_identity(const nlohmann::json& record);

/// Appends lines to a JSON-lines file in a single write.
void append_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);

/// One scalar of one record in long format.
struct Observation {
  std::map<std::string, std::string> keys;
  std::string quantity;
  double value = 0.0;
};

/// Group keys available for aggregation.
const std::vector<std::string>& known_group_keys();

std::vector<Observation> flatten_records(const std::vector<nlohmann::json>& records);

struct AggregateRow {
  std::map<std::string, std::string> keys;  // the group keys only
  std::string quantity;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::int64_t n = 0;
  std::vector<double> values;
};

/// Groups by `group_keys` plus the quantity name; throws kInvalidArgument for
/// keys that are unknown or absent from every observation.
std::vector<AggregateRow> aggregate(const std::vector<Observation>& observations,
                                    const std::vector<std::string>& group_keys);

void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::vector<std::string>& group_keys,
                         const std::filesystem::path& path);

}  // namespace compgen
