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
#include <string>

#include <json.hpp>
#include <torch/torch.h>

#include "compgen/el.hpp"
#include "compgen/vae.hpp"

namespace compgen {

enum class ModelFamily { kBetaVae, kBetaTcvae, kEl };
std::string to_string(ModelFamily family);
ModelFamily parse_model_family(std::string_view name);

enum class RepMode { kPre, kLatent, kPost };
std::string to_string(RepMode mode);
RepMode parse_rep_mode(std::string_view name);

struct ModelConfig {
  ModelFamily family = ModelFamily::kBetaVae;
  int channels = 1;
  int resolution = 64;
  int width_multiplier = 2;
  VaeConfig vae;  // beta_vae / beta_tcvae
  ElConfig el;    // el

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

struct LossOutput {
  torch::Tensor total;
  std::map<std::string, double> terms;  // detached values for logging
};

/// A trainable representation model of either family behind one interface.
class Model {
 public:
  virtual ~Model() = default;

  const ModelConfig& config() const { return config_; }
  virtual torch::nn::Module& module() = 0;

  /// Training objective on a batch in [0, 1]; `noise_seed` determines every
  /// random draw of the step.
  virtual LossOutput loss(const torch::Tensor& x, std::uint64_t noise_seed) = 0;

  /// Deterministic representation of a batch (no gradient).
  virtual torch::Tensor represent(const torch::Tensor& x, RepMode mode) = 0;

  /// Greedy messages (EL only; throws otherwise).
  virtual MessageBatch messages(const torch::Tensor& x);

  void set_dataset_size(std::int64_t n) { config_.vae.dataset_size = n; }
  void to(torch::ScalarType dtype) { module().to(dtype); }

 protected:
  explicit Model(ModelConfig config) : config_(std::move(config)) {}
  ModelConfig config_;
};

/// Builds a model with parameters initialized from `init_seed`.
std::unique_ptr<Model> make_model(const ModelConfig& config, std::uint64_t init_seed);

/// Checkpoint directory: manifest.json (config, step, seed, tensor
/// name/shape/dtype/file/crc32) plus one raw little-endian float32 file per
/// named tensor.
void save_checkpoint(Model& model, const std::filesystem::path& dir, std::int64_t step,
                     std::uint64_t seed, const nlohmann::json& extra = nlohmann::json::object());

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  nlohmann::json manifest;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

/// CRC-32 over all tensor files in manifest order, for quick equality checks.
std::string checkpoint_digest(const std::filesystem::path& dir);

}  // namespace compgen
