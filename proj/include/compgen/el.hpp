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
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "compgen/nn_blocks.hpp"

namespace compgen {

inline constexpr int kEosToken = 0;

struct ElConfig {
  int vocab_size = 256;  // includes EOS
  int max_len = 10;
  double temperature = 1.0;
  int embedding_dim = 0;  // 0: 128 * width multiplier
  int hidden_dim = 0;     // 0: 256 * width multiplier
  bool variable_length = true;
  bool stochastic = true;

  double bandwidth_bits() const;
  nlohmann::json to_json() const;
  static ElConfig from_json(const nlohmann::json& j);
};

/// A batch of messages. `one_hots` carries the straight-through gradient;
/// rows at positions >= length are zeroed.
struct MessageBatch {
  torch::Tensor tokens;    // [B, n_msg] int64, post-EOS positions retained
  torch::Tensor one_hots;  // [B, n_msg, n_V], masked
  torch::Tensor lengths;   // [B] int64, effective length T
};

/// Forward value is the exact one-hot of argmax(soft); the gradient is that
/// of soft = softmax((logits + gumbel) / tau). An undefined `gumbel` gives
/// the greedy (noise-free) variant.
std::pair<torch::Tensor, torch::Tensor> gumbel_softmax_st(const torch::Tensor& logits,
                                                          const torch::Tensor& gumbel, double tau);

/// Standard Gumbel noise -log(-log u) from the library generator.
torch::Tensor gumbel_noise(torch::IntArrayRef shape, std::uint64_t seed, torch::ScalarType dtype);

/// 1-based index of the first EOS, or n_msg when there is none.
int effective_length(const std::vector<std::int64_t>& tokens, int eos_id, int n_msg);

struct ElNetImpl : torch::nn::Module {
  ElNetImpl(int channels, int resolution, int width_multiplier, const ElConfig& config);

  /// z_pre and the messages. With `greedy` the channel uses no noise
  /// regardless of config.stochastic.
  std::pair<torch::Tensor, MessageBatch> speak(const torch::Tensor& x, std::uint64_t seed,
                                               bool greedy = false);
  /// Listener state at step T (z_post) and image logits.
  std::pair<torch::Tensor, torch::Tensor> listen(const MessageBatch& message);

  ElConfig config;
  EncConv enc_conv{nullptr};
  torch::nn::Linear cell_init{nullptr};
  torch::nn::LSTMCell speaker{nullptr};
  torch::Tensor bos;
  torch::Tensor speaker_embedding;  // [n_V, E]
  torch::nn::Linear head{nullptr};
  torch::Tensor listener_embedding;  // [n_V, E]
  torch::nn::LSTMCell listener{nullptr};
  torch::nn::Linear to_conv{nullptr};
  DecConv dec_conv{nullptr};
};
TORCH_MODULE(ElNet);

/// Applies EOS truncation (when variable_length) to raw step outputs.
MessageBatch make_message(const torch::Tensor& tokens, const torch::Tensor& one_hots,
                          bool variable_length);

torch::Tensor el_loss(ElNet& net, const torch::Tensor& x, std::uint64_t seed);

}  // namespace compgen
