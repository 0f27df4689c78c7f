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
#include <map>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include <torch/torch.h>

#include "compgen/dataset_store.hpp"
#include "compgen/model.hpp"
#include "compgen/random.hpp"

namespace compgen {

/// Supplies image batches by flat id.
class ImageSource {
 public:
  virtual ~ImageSource() = default;
  /// [B, C, H, W] float32 in [0, 1].
  virtual torch::Tensor fetch(std::span<const std::int64_t> ids) = 0;
};

/// Reads images from a DatasetStore and remembers every id it served.
class StoreImageSource : public ImageSource {
 public:
  explicit StoreImageSource(const DatasetStore& store) : store_(store) {}
  torch::Tensor fetch(std::span<const std::int64_t> ids) override;

  const std::set<std::int64_t>& fetched() const { return fetched_; }
  std::int64_t fetch_count() const { return fetch_count_; }
  void reset_log() {
    fetched_.clear();
    fetch_count_ = 0;
  }

 private:
  const DatasetStore& store_;
  std::set<std::int64_t> fetched_;
  std::int64_t fetch_count_ = 0;
};

struct TrainConfig {
  std::int64_t steps = 1000;
  int batch_size = 64;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 0;  // 0: final checkpoint only
  std::int64_t loss_log_every = 10;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Draws `batch_size` ids uniformly with replacement from `train_ids`.
class BatchSampler {
 public:
  BatchSampler(std::span<const std::int64_t> train_ids, std::uint64_t seed);
  std::vector<std::int64_t> next(int batch_size);

 private:
  std::vector<std::int64_t> ids_;
  Rng rng_;
};

struct TrainResult {
  std::unique_ptr<Model> model;
  std::int64_t steps = 0;
  std::filesystem::path checkpoint;  // final checkpoint directory (empty if no out_dir)
  std::vector<std::map<std::string, double>> log;  // logged rows (includes "step")
};

/// Adam(lr, 0.9, 0.999, 1e-8) on uniformly sampled batches of train ids.
/// With a non-empty `out_dir`, writes loss.csv, checkpoints under
/// out_dir/checkpoints/step_<n>, and out_dir/final. A non-finite loss
/// writes out_dir/diverged (model before the step, batch ids, loss terms)
/// and throws kDiverged.
TrainResult train(const ModelConfig& config, std::span<const std::int64_t> train_ids,
                  ImageSource& source, const TrainConfig& train_config,
                  const std::filesystem::path& out_dir = {});

}  // namespace compgen
