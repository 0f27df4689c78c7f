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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compgen/model.hpp"
#include "compgen/trainer.hpp"

namespace compgen {

/// Representation matrix of one mode for an id list; row i belongs to ids[i].
struct RepresentationBundle {
  RepMode mode = RepMode::kLatent;
  Eigen::MatrixXd features;  // float32-valued
  std::vector<std::int64_t> ids;
  std::string model_ref;
  std::string split_ref;
  std::uint64_t seed = 0;
};

/// Runs the frozen model over `ids` in batches. EL models use greedy
/// messages, VAE models the posterior mean, so extraction is deterministic.
RepresentationBundle extract(Model& model, ImageSource& source, std::span<const std::int64_t> ids,
                             RepMode mode, int batch_size = 256);

/// All three modes in one pass over the ids.
std::vector<RepresentationBundle> extract_all(Model& model, ImageSource& source,
                                              std::span<const std::int64_t> ids,
                                              int batch_size = 256);

/// meta.json (mode, shape, ids, refs, checksum) + features.bin, row-major
/// little-endian float32.
void save_bundle(const RepresentationBundle& bundle, const std::filesystem::path& dir);
RepresentationBundle load_bundle(const std::filesystem::path& dir);

struct MessageRecord {
  std::int64_t flat_id = 0;
  std::vector<int> tokens;  // all n_msg positions
  int length = 0;           // effective length T
};

/// Greedy messages for `ids` (EL models only).
std::vector<MessageRecord> dump_messages(Model& model, ImageSource& source,
                                         std::span<const std::int64_t> ids, int batch_size = 256);
/// JSON lines of {"flat_id", "tokens", "T"}.
void write_messages_jsonl(const std::vector<MessageRecord>& messages, const std::filesystem::path& path);
std::vector<MessageRecord> read_messages_jsonl(const std::filesystem::path& path);

}  // namespace compgen
