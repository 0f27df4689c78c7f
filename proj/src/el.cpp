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

#include "compgen/el.hpp"

#include <cmath>

#include "compgen/error.hpp"
#include "compgen/random.hpp"

namespace compgen {

double ElConfig::bandwidth_bits() const { return max_len * std::log2(static_cast<double>(vocab_size)); }

nlohmann::json ElConfig::to_json() const {
  return {{"vocab_size", vocab_size},       {"max_len", max_len},
          {"temperature", temperature},     {"embedding_dim", embedding_dim},
          {"hidden_dim", hidden_dim},       {"variable_length", variable_length},
          {"stochastic", stochastic}};
}

ElConfig ElConfig::from_json(const nlohmann::json& j) {
  ElConfig c;
  c.vocab_size = j.value("vocab_size", 256);
  c.max_len = j.value("max_len", 10);
  c.temperature = j.value("temperature", 1.0);
  c.embedding_dim = j.value("embedding_dim", 0);
  c.hidden_dim = j.value("hidden_dim", 0);
  c.variable_length = j.value("variable_length", true);
  c.stochastic = j.value("stochastic", true);
  require(c.vocab_size >= 2, ErrorCode::kConfig, "vocab_size must be >= 2 (it includes EOS)");
  require(c.max_len >= 1, ErrorCode::kConfig, "max_len must be >= 1");
  require(c.temperature > 0.0, ErrorCode::kConfig, "temperature must be > 0");
  return c;
}

std::pair<torch::Tensor, torch::Tensor> gumbel_softmax_st(const torch::Tensor& logits,
                                                          const torch::Tensor& gumbel, double tau) {
  require(tau > 0.0, ErrorCode::kInvalidArgument, "temperature must be > 0");
  const auto perturbed = gumbel.defined() ? logits + gumbel : logits;
  const auto soft = torch::softmax(perturbed / tau, -1);
  const auto index = soft.argmax(-1, true);
  const auto hard = torch::zeros_like(soft).scatter_(-1, index, 1.0);
  // hard + (soft - soft) is exactly hard in the forward pass.
  return {hard + (soft - soft.detach()), soft};
}

torch::Tensor gumbel_noise(torch::IntArrayRef shape, std::uint64_t seed, torch::ScalarType dtype) {
  Rng rng(seed);
  auto out = torch::empty(shape, torch::TensorOptions().dtype(torch::kFloat64));
  auto* data = out.data_ptr<double>();
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    // Open interval (0, 1).
    const double u = (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
    data[i] = -std::log(-std::log(u));
  }
  return out.to(dtype);
}

int effective_length(const std::vector<std::int64_t>& tokens, int eos_id, int n_msg) {
  require(static_cast<int>(tokens.size()) == n_msg, ErrorCode::kInvalidArgument,
          "effective_length: token count differs from n_msg");
  for (int t = 0; t < n_msg; ++t) {
    if (tokens[static_cast<std::size_t>(t)] == eos_id) return t + 1;
  }
  return n_msg;
}

MessageBatch make_message(const torch::Tensor& tokens, const torch::Tensor& one_hots,
                          bool variable_length) {
  const auto b = tokens.size(0);
  const auto n_msg = tokens.size(1);
  torch::Tensor lengths;
  if (variable_length) {
    const auto is_eos = tokens.eq(kEosToken);
    // First EOS position (0-based) + 1, or n_msg.
    const auto positions = torch::arange(n_msg, tokens.options()).unsqueeze(0).expand({b, n_msg});
    const auto first = torch::where(is_eos, positions, torch::full_like(positions, n_msg)).amin(1);
    lengths = torch::clamp_max(first + 1, n_msg);
  } else {
    lengths = torch::full({b}, n_msg, tokens.options());
  }
  const auto steps = torch::arange(n_msg, tokens.options()).unsqueeze(0);
  const auto mask = steps.lt(lengths.unsqueeze(1)).to(one_hots.scalar_type()).unsqueeze(2);
  return MessageBatch{tokens, one_hots * mask, lengths};
}

ElNetImpl::ElNetImpl(int channels, int resolution, int width_multiplier, const ElConfig& cfg)
    : config(cfg) {
  const std::int64_t m = width_multiplier;
  if (config.embedding_dim <= 0) config.embedding_dim = static_cast<int>(128 * m);
  if (config.hidden_dim <= 0) config.hidden_dim = static_cast<int>(256 * m);
  const auto e = config.embedding_dim;
  const auto h = config.hidden_dim;
  const auto v = config.vocab_size;

  enc_conv = register_module("enc_conv", EncConv(channels, resolution, width_multiplier));
  cell_init = register_module("cell_init", torch::nn::Linear(enc_conv->out_features(), h));
  speaker = register_module("speaker", torch::nn::LSTMCell(e, h));
  bos = register_parameter("bos", torch::randn({1, e}) * 0.1);
  speaker_embedding = register_parameter("speaker_embedding", torch::randn({v, e}) * 0.1);
  head = register_module("head", torch::nn::Linear(h, v));
  listener_embedding = register_parameter("listener_embedding", torch::randn({v, e}) * 0.1);
  listener = register_module("listener", torch::nn::LSTMCell(e, h));
  to_conv = register_module("to_conv", torch::nn::Linear(h, enc_conv->out_features()));
  dec_conv = register_module("dec_conv", DecConv(channels, resolution, width_multiplier));
}

std::pair<torch::Tensor, MessageBatch> ElNetImpl::speak(const torch::Tensor& x, std::uint64_t seed,
                                                       bool greedy) {
  const auto pre = enc_conv(x);
  const auto b = x.size(0);
  const auto n_msg = config.max_len;
  auto c = cell_init(pre);
  auto h = torch::zeros_like(c);
  auto input = bos.expand({b, bos.size(1)});
  const bool noisy = config.stochastic && !greedy;
  const auto noise = noisy ? gumbel_noise({b, n_msg, config.vocab_size}, seed, x.scalar_type())
                           : torch::Tensor();
  std::vector<torch::Tensor> one_hots, tokens;
  for (int t = 0; t < n_msg; ++t) {
    std::tie(h, c) = speaker(input, std::make_tuple(h, c));
    const auto logits = head(h);
    auto [one_hot, soft] = gumbel_softmax_st(logits, noisy ? noise.select(1, t) : torch::Tensor(),
                                             config.temperature);
    tokens.push_back(one_hot.detach().argmax(-1));
    one_hots.push_back(one_hot);
    input = torch::matmul(one_hot, speaker_embedding);
  }
  return {pre, make_message(torch::stack(tokens, 1), torch::stack(one_hots, 1), config.variable_length)};
}

std::pair<torch::Tensor, torch::Tensor> ElNetImpl::listen(const MessageBatch& message) {
  const auto b = message.one_hots.size(0);
  const auto n_msg = message.one_hots.size(1);
  const auto embedded = torch::matmul(message.one_hots, listener_embedding);  // [B, n_msg, E]
  auto h = torch::zeros({b, config.hidden_dim}, embedded.options());
  auto c = torch::zeros_like(h);
  std::vector<torch::Tensor> states;
  for (std::int64_t t = 0; t < n_msg; ++t) {
    std::tie(h, c) = listener(embedded.select(1, t), std::make_tuple(h, c));
    states.push_back(h);
  }
  const auto all = torch::stack(states, 1);  // [B, n_msg, H]
  const auto index = (message.lengths - 1).view({b, 1, 1}).expand({b, 1, all.size(2)});
  const auto post = all.gather(1, index).squeeze(1);
  return {post, dec_conv(torch::relu(to_conv(post)))};
}

torch::Tensor el_loss(ElNet& net, const torch::Tensor& x, std::uint64_t seed) {
  auto [pre, message] = net->speak(x, seed);
  auto [post, logits] = net->listen(message);
  return bernoulli_nll(logits, x);
}

}  // namespace compgen
