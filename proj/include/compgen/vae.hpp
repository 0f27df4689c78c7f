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
#include <optional>

#include <json.hpp>
#include <torch/torch.h>

#include "compgen/nn_blocks.hpp"

namespace compgen {

enum class VaeVariant { kBetaVae, kBetaTcvae };

struct VaeConfig {
  VaeVariant variant = VaeVariant::kBetaVae;
  double beta = 1.0;
  double alpha = 1.0;  // mutual-information weight (beta_tcvae)
  double gamma = 1.0;  // dimension-wise KL weight (beta_tcvae)
  int latent_dim = 10;
  std::int64_t dataset_size = 0;  // 0: filled in by the trainer from the train split
  std::optional<double> logvar_clamp;  // symmetric bound, off by default

  nlohmann::json to_json() const;
  static VaeConfig from_json(const nlohmann::json& j);
};

struct GaussianPosterior {
  torch::Tensor mu;      // [B, latent]
  torch::Tensor logvar;  // [B, latent]
};

/// Per-batch means. Terms a variant does not use are zero.
struct VaeLossTerms {
  torch::Tensor total;
  torch::Tensor reconstruction_nll;
  torch::Tensor kl;
  torch::Tensor mutual_info;
  torch::Tensor total_correlation;
  torch::Tensor dimwise_kl;
};

struct VaeNetImpl : torch::nn::Module {
  VaeNetImpl(int channels, int resolution, int width_multiplier, int latent_dim,
             std::optional<double> logvar_clamp = std::nullopt);

  /// Returns the flattened conv features (z_pre) and the posterior.
  std::pair<torch::Tensor, GaussianPosterior> encode(const torch::Tensor& x);
  /// Returns the decoder MLP output (z_post) and the image logits.
  std::pair<torch::Tensor, torch::Tensor> decode(const torch::Tensor& z);

  EncConv enc_conv{nullptr};
  Mlp enc_mlp{nullptr};
  Mlp dec_mlp{nullptr};
  DecConv dec_conv{nullptr};
  int latent_dim = 0;
  std::optional<double> logvar_clamp;
};
TORCH_MODULE(VaeNet);

/// z = mu + exp(logvar / 2) * noise.
torch::Tensor reparameterize(const GaussianPosterior& q, const torch::Tensor& noise);

/// Per-dimension KL(q || N(0, I)), averaged over the batch.
torch::Tensor kl_standard_normal(const GaussianPosterior& q);

/// log N(z; mu, exp(logvar)) elementwise.
torch::Tensor gaussian_log_density(const torch::Tensor& z, const torch::Tensor& mu,
                                   const torch::Tensor& logvar);

struct TcTerms {
  torch::Tensor mutual_info;
  torch::Tensor total_correlation;
  torch::Tensor dimwise_kl;
};

/// Minibatch estimate of the KL decomposition from one sample z_i of each
/// posterior in the batch. The aggregate density q(z) is estimated with
/// importance weights 1/N for the sample's own posterior and
/// (N-1)/(N(M-1)) for the other M-1 batch members (N = dataset size), which
/// makes the three terms add up to mean[log q(z_i|x_i) - log p(z_i)].
/// Rows are processed in chunks so large M stays within memory.
TcTerms tc_decomposition(const torch::Tensor& z, const GaussianPosterior& q,
                         std::int64_t dataset_size, std::int64_t chunk_rows = 512);

VaeLossTerms beta_vae_loss(VaeNet& net, const torch::Tensor& x, const torch::Tensor& noise,
                           const VaeConfig& config);
VaeLossTerms tc_decomposition_loss(VaeNet& net, const torch::Tensor& x, const torch::Tensor& noise,
                                   const VaeConfig& config);

}  // namespace compgen
