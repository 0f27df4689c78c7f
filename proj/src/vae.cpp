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

#include "compgen/vae.hpp"

#include <cmath>
#include <numbers>

#include "compgen/error.hpp"

namespace compgen {

nlohmann::json VaeConfig::to_json() const {
  nlohmann::json j{{"variant", variant == VaeVariant::kBetaVae ? "beta_vae" : "beta_tcvae"},
                   {"beta", beta},
                   {"alpha", alpha},
                   {"gamma", gamma},
                   {"latent_dim", latent_dim},
                   {"dataset_size", dataset_size}};
  j["logvar_clamp"] = logvar_clamp ? nlohmann::json(*logvar_clamp) : nlohmann::json(nullptr);
  return j;
}

VaeConfig VaeConfig::from_json(const nlohmann::json& j) {
  VaeConfig c;
  const auto variant = j.value("variant", std::string("beta_vae"));
  if (variant == "beta_vae") {
    c.variant = VaeVariant::kBetaVae;
  } else if (variant == "beta_tcvae") {
    c.variant = VaeVariant::kBetaTcvae;
  } else {
    fail(ErrorCode::kConfig, "unknown vae variant '" + variant + "'");
  }
  c.beta = j.value("beta", 1.0);
  c.alpha = j.value("alpha", 1.0);
  c.gamma = j.value("gamma", 1.0);
  c.latent_dim = j.value("latent_dim", 10);
  c.dataset_size = j.value("dataset_size", std::int64_t{0});
  if (j.contains("logvar_clamp") && !j.at("logvar_clamp").is_null()) {
    c.logvar_clamp = j.at("logvar_clamp").get<double>();
  }
  require(c.beta >= 0.0, ErrorCode::kConfig, "beta must be >= 0");
  require(c.latent_dim >= 1, ErrorCode::kConfig, "latent_dim must be >= 1");
  return c;
}

VaeNetImpl::VaeNetImpl(int channels, int resolution, int width_multiplier, int latent_dim,
                       std::optional<double> logvar_clamp)
    : latent_dim(latent_dim), logvar_clamp(logvar_clamp) {
  const std::int64_t m = width_multiplier;
  enc_conv = register_module("enc_conv", EncConv(channels, resolution, width_multiplier));
  const auto flat = enc_conv->out_features();
  enc_mlp = register_module(
      "enc_mlp", Mlp(std::vector<std::int64_t>{flat, 256 * m, 512 * m, 512 * m, 256 * m, 2 * latent_dim},
                     false));
  dec_mlp = register_module(
      "dec_mlp", Mlp(std::vector<std::int64_t>{latent_dim, 256 * m, 512 * m, 512 * m, 256 * m, flat},
                     true));
  dec_conv = register_module("dec_conv", DecConv(channels, resolution, width_multiplier));
}

std::pair<torch::Tensor, GaussianPosterior> VaeNetImpl::encode(const torch::Tensor& x) {
  auto pre = enc_conv(x);
  auto stats = enc_mlp(pre);
  auto mu = stats.narrow(1, 0, latent_dim);
  auto logvar = stats.narrow(1, latent_dim, latent_dim);
  if (logvar_clamp) logvar = logvar.clamp(-*logvar_clamp, *logvar_clamp);
  return {pre, GaussianPosterior{mu, logvar}};
}

std::pair<torch::Tensor, torch::Tensor> VaeNetImpl::decode(const torch::Tensor& z) {
  require(z.dim() == 2 && z.size(1) == latent_dim, ErrorCode::kInvalidArgument,
          "decode: z must have latent_dim columns");
  auto post = dec_mlp(z);
  return {post, dec_conv(post)};
}

torch::Tensor reparameterize(const GaussianPosterior& q, const torch::Tensor& noise) {
  return q.mu + torch::exp(0.5 * q.logvar) * noise;
}

torch::Tensor kl_standard_normal(const GaussianPosterior& q) {
  return (0.5 * (q.mu.square() + q.logvar.exp() - q.logvar - 1.0)).mean(0);
}

torch::Tensor gaussian_log_density(const torch::Tensor& z, const torch::Tensor& mu,
                                   const torch::Tensor& logvar) {
  static const double kLog2Pi = std::log(2.0 * std::numbers::pi);
  return -0.5 * (kLog2Pi + logvar + (z - mu).square() * torch::exp(-logvar));
}

TcTerms tc_decomposition(const torch::Tensor& z, const GaussianPosterior& q,
                         std::int64_t dataset_size, std::int64_t chunk_rows) {
  const auto m = z.size(0);
  if (m < 2) fail(ErrorCode::kEstimatorUndefined, "total-correlation estimator needs a batch of at least 2");
  require(dataset_size >= m, ErrorCode::kInvalidArgument,
          "total-correlation estimator: dataset size must be >= batch size");
  require(chunk_rows >= 1, ErrorCode::kInvalidArgument, "chunk_rows must be >= 1");

  const double n = static_cast<double>(dataset_size);
  const double log_self = -std::log(n);
  const double log_other = std::log((n - 1.0) / (n * static_cast<double>(m - 1)));

  // Per-posterior constants laid out [1, D, M] so reductions run over contiguous M.
  static const double kLog2Pi = std::log(2.0 * std::numbers::pi);
  const auto mu_t = q.mu.t().unsqueeze(0).contiguous();
  const auto scale_t = (-0.5 * torch::exp(-q.logvar)).t().unsqueeze(0).contiguous();
  const auto offset_t = (-0.5 * (kLog2Pi + q.logvar)).t().unsqueeze(0).contiguous();

  std::vector<torch::Tensor> log_qz, log_qz_marg;
  for (std::int64_t start = 0; start < m; start += chunk_rows) {
    const auto rows = std::min(chunk_rows, m - start);
    // [rows, D, M]: log q(z_i^d | x_j)
    const auto zi = z.narrow(0, start, rows).unsqueeze(2);
    const auto mat = torch::addcmul(offset_t, (zi - mu_t).square(), scale_t);
    auto weights = torch::full({rows, m}, log_other, z.options());
    weights.diagonal(start).fill_(log_self);  // entries (i, start + i)
    log_qz.push_back(torch::logsumexp(mat.sum(1) + weights, 1));
    log_qz_marg.push_back(torch::logsumexp(mat + weights.unsqueeze(1), 2));  // [rows, D]
  }
  const auto lqz = torch::cat(log_qz);
  const auto lqz_marg = torch::cat(log_qz_marg);
  const auto log_qzx = gaussian_log_density(z, q.mu, q.logvar).sum(1);
  const auto log_pz = gaussian_log_density(z, torch::zeros_like(z), torch::zeros_like(z));
  return TcTerms{(log_qzx - lqz).mean(), (lqz - lqz_marg.sum(1)).mean(),
                 (lqz_marg - log_pz).sum(1).mean()};
}

namespace {

void check_noise(const torch::Tensor& noise, const torch::Tensor& x, int latent_dim) {
  require(noise.dim() == 2 && noise.size(0) == x.size(0) && noise.size(1) == latent_dim,
          ErrorCode::kInvalidArgument, "noise must be [B, latent_dim]");
}

}  // namespace

VaeLossTerms beta_vae_loss(VaeNet& net, const torch::Tensor& x, const torch::Tensor& noise,
                           const VaeConfig& config) {
  require(config.variant == VaeVariant::kBetaVae, ErrorCode::kInvalidArgument,
          "beta_vae_loss called with a beta_tcvae config");
  check_noise(noise, x, net->latent_dim);
  auto [pre, q] = net->encode(x);
  auto [post, logits] = net->decode(reparameterize(q, noise));
  VaeLossTerms t;
  t.reconstruction_nll = bernoulli_nll(logits, x);
  t.kl = kl_standard_normal(q).sum();
  const auto zero = torch::zeros({}, x.options());
  t.mutual_info = t.total_correlation = t.dimwise_kl = zero;
  t.total = t.reconstruction_nll + config.beta * t.kl;
  return t;
}

VaeLossTerms tc_decomposition_loss(VaeNet& net, const torch::Tensor& x, const torch::Tensor& noise,
                                   const VaeConfig& config) {
  require(config.variant == VaeVariant::kBetaTcvae, ErrorCode::kInvalidArgument,
          "tc_decomposition_loss called with a beta_vae config");
  check_noise(noise, x, net->latent_dim);
  auto [pre, q] = net->encode(x);
  const auto z = reparameterize(q, noise);
  auto [post, logits] = net->decode(z);
  const auto dataset_size = config.dataset_size > 0 ? config.dataset_size : x.size(0);
  const auto tc = tc_decomposition(z, q, dataset_size);
  VaeLossTerms t;
  t.reconstruction_nll = bernoulli_nll(logits, x);
  t.kl = kl_standard_normal(q).sum();
  t.mutual_info = tc.mutual_info;
  t.total_correlation = tc.total_correlation;
  t.dimwise_kl = tc.dimwise_kl;
  t.total = t.reconstruction_nll + config.alpha * t.mutual_info + config.beta * t.total_correlation +
            config.gamma * t.dimwise_kl;
  return t;
}

}  // namespace compgen
