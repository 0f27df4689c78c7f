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

#include "compgen/model.hpp"

#include <algorithm>

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"
#include "compgen/random.hpp"

namespace compgen {

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::kBetaVae: return "beta_vae";
    case ModelFamily::kBetaTcvae: return "beta_tcvae";
    case ModelFamily::kEl: return "el";
  }
  return "?";
}

ModelFamily parse_model_family(std::string_view name) {
  if (name == "beta_vae") return ModelFamily::kBetaVae;
  if (name == "beta_tcvae") return ModelFamily::kBetaTcvae;
  if (name == "el") return ModelFamily::kEl;
  fail(ErrorCode::kConfig, "unknown model family '" + std::string(name) + "'");
}

std::string to_string(RepMode mode) {
  switch (mode) {
    case RepMode::kPre: return "pre";
    case RepMode::kLatent: return "latent";
    case RepMode::kPost: return "post";
  }
  return "?";
}

RepMode parse_rep_mode(std::string_view name) {
  if (name == "pre") return RepMode::kPre;
  if (name == "latent") return RepMode::kLatent;
  if (name == "post") return RepMode::kPost;
  fail(ErrorCode::kInvalidArgument, "unknown representation mode '" + std::string(name) + "'");
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j{{"family", to_string(family)},
                   {"channels", channels},
                   {"resolution", resolution},
                   {"width_multiplier", width_multiplier}};
  if (family == ModelFamily::kEl) {
    j["el"] = el.to_json();
  } else {
    j["vae"] = vae.to_json();
  }
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.family = parse_model_family(j.at("family").get<std::string>());
  c.channels = j.value("channels", 1);
  c.resolution = j.value("resolution", 64);
  c.width_multiplier = j.value("width_multiplier", 2);
  if (c.family == ModelFamily::kEl) {
    c.el = ElConfig::from_json(j.value("el", nlohmann::json::object()));
  } else {
    c.vae = VaeConfig::from_json(j.value("vae", nlohmann::json::object()));
    const auto expected = c.family == ModelFamily::kBetaVae ? VaeVariant::kBetaVae : VaeVariant::kBetaTcvae;
    if (!j.contains("vae") || !j.at("vae").contains("variant")) c.vae.variant = expected;
    require(c.vae.variant == expected, ErrorCode::kConfig, "model family and vae variant disagree");
  }
  return c;
}

MessageBatch Model::messages(const torch::Tensor&) {
  fail(ErrorCode::kInvalidArgument, "messages are only defined for the emergent-language model");
}

namespace {

torch::Tensor standard_normal(torch::IntArrayRef shape, std::uint64_t seed, torch::ScalarType dtype) {
  Rng rng(seed);
  auto out = torch::empty(shape, torch::TensorOptions().dtype(torch::kFloat64));
  auto* data = out.data_ptr<double>();
  for (std::int64_t i = 0; i < out.numel(); ++i) data[i] = rng.normal();
  return out.to(dtype);
}

class VaeModel final : public Model {
 public:
  explicit VaeModel(ModelConfig config)
      : Model(std::move(config)),
        net_(config_.channels, config_.resolution, config_.width_multiplier,
             config_.vae.latent_dim, config_.vae.logvar_clamp) {}

  torch::nn::Module& module() override { return *net_; }

  LossOutput loss(const torch::Tensor& x, std::uint64_t noise_seed) override {
    check_image_batch(x, config_.channels, config_.resolution);
    const auto noise = standard_normal({x.size(0), config_.vae.latent_dim}, noise_seed, x.scalar_type());
    const auto t = config_.family == ModelFamily::kBetaVae
                       ? beta_vae_loss(net_, x, noise, config_.vae)
                       : tc_decomposition_loss(net_, x, noise, config_.vae);
    LossOutput out{t.total, {}};
    out.terms["total"] = t.total.item<double>();
    out.terms["reconstruction_nll"] = t.reconstruction_nll.item<double>();
    out.terms["kl"] = t.kl.item<double>();
    if (config_.family == ModelFamily::kBetaTcvae) {
      out.terms["mutual_info"] = t.mutual_info.item<double>();
      out.terms["total_correlation"] = t.total_correlation.item<double>();
      out.terms["dimwise_kl"] = t.dimwise_kl.item<double>();
    }
    return out;
  }

  torch::Tensor represent(const torch::Tensor& x, RepMode mode) override {
    check_image_batch(x, config_.channels, config_.resolution);
    torch::NoGradGuard no_grad;
    auto [pre, q] = net_->encode(x);
    switch (mode) {
      case RepMode::kPre: return pre;
      case RepMode::kLatent: return q.mu;
      case RepMode::kPost: return net_->decode(q.mu).first;
    }
    fail(ErrorCode::kInvalidArgument, "unknown representation mode");
  }

  VaeNet& net() { return net_; }

 private:
  VaeNet net_;
};

class ElModel final : public Model {
 public:
  explicit ElModel(ModelConfig config)
      : Model(std::move(config)),
        net_(config_.channels, config_.resolution, config_.width_multiplier, config_.el) {}

  torch::nn::Module& module() override { return *net_; }

  LossOutput loss(const torch::Tensor& x, std::uint64_t noise_seed) override {
    check_image_batch(x, config_.channels, config_.resolution);
    auto [pre, message] = net_->speak(x, noise_seed);
    auto [post, logits] = net_->listen(message);
    LossOutput out{bernoulli_nll(logits, x), {}};
    out.terms["total"] = out.total.item<double>();
    out.terms["reconstruction_nll"] = out.terms["total"];
    out.terms["mean_length"] = message.lengths.to(torch::kFloat64).mean().item<double>();
    return out;
  }

  torch::Tensor represent(const torch::Tensor& x, RepMode mode) override {
    check_image_batch(x, config_.channels, config_.resolution);
    torch::NoGradGuard no_grad;
    auto [pre, message] = net_->speak(x, 0, /*greedy=*/true);
    switch (mode) {
      case RepMode::kPre: return pre;
      case RepMode::kLatent: return message.one_hots.flatten(1);
      case RepMode::kPost: return net_->listen(message).first;
    }
    fail(ErrorCode::kInvalidArgument, "unknown representation mode");
  }

  MessageBatch messages(const torch::Tensor& x) override {
    check_image_batch(x, config_.channels, config_.resolution);
    torch::NoGradGuard no_grad;
    return net_->speak(x, 0, /*greedy=*/true).second;
  }

 private:
  ElNet net_;
};

}  // namespace

std::unique_ptr<Model> make_model(const ModelConfig& config, std::uint64_t init_seed) {
  torch::manual_seed(init_seed);
  if (config.family == ModelFamily::kEl) return std::make_unique<ElModel>(config);
  return std::make_unique<VaeModel>(config);
}

namespace {

std::vector<std::pair<std::string, torch::Tensor>> named_state(torch::nn::Module& m) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& p : m.named_parameters()) out.emplace_back(p.key(), p.value());
  for (const auto& b : m.named_buffers()) out.emplace_back(b.key(), b.value());
  return out;
}

}  // namespace

void save_checkpoint(Model& model, const std::filesystem::path& dir, std::int64_t step,
                     std::uint64_t seed, const nlohmann::json& extra) {
  std::filesystem::create_directories(dir / "tensors");
  nlohmann::json manifest{{"format", "compgen-checkpoint-v1"},
                          {"config", model.config().to_json()},
                          {"step", step},
                          {"seed", seed},
                          {"extra", extra}};
  auto& tensors = manifest["tensors"] = nlohmann::json::array();
  for (const auto& [name, tensor] : named_state(model.module())) {
    const auto t = tensor.detach().to(torch::kFloat32).contiguous();
    const auto bytes = to_le_bytes<float>({t.data_ptr<float>(), static_cast<std::size_t>(t.numel())});
    const std::string file = "tensors/" + name + ".bin";
    write_file_bytes(dir / file, bytes);
    tensors.push_back({{"name", name},
                       {"shape", t.sizes().vec()},
                       {"dtype", "float32"},
                       {"file", file},
                       {"crc32", crc32_hex(bytes)}});
  }
  write_json(dir / "manifest.json", manifest);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  LoadedCheckpoint out;
  out.manifest = read_json(dir / "manifest.json");
  require(out.manifest.value("format", "") == "compgen-checkpoint-v1", ErrorCode::kStoreCorrupt,
          "not a checkpoint manifest: " + (dir / "manifest.json").string());
  const auto config = ModelConfig::from_json(out.manifest.at("config"));
  out.step = out.manifest.at("step").get<std::int64_t>();
  out.seed = out.manifest.at("seed").get<std::uint64_t>();
  out.model = make_model(config, 0);
  auto state = named_state(out.model->module());
  std::map<std::string, torch::Tensor> by_name(state.begin(), state.end());
  require(out.manifest.at("tensors").size() == by_name.size(), ErrorCode::kStoreCorrupt,
          "checkpoint tensor count does not match the model");
  torch::NoGradGuard no_grad;
  for (const auto& entry : out.manifest.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto it = by_name.find(name);
    require(it != by_name.end(), ErrorCode::kStoreCorrupt, "checkpoint has unknown tensor " + name);
    const auto bytes = read_file_bytes(dir / entry.at("file").get<std::string>());
    require(crc32_hex(bytes) == entry.at("crc32").get<std::string>(), ErrorCode::kStoreCorrupt,
            "checksum mismatch for tensor " + name);
    const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
    require(it->second.sizes().vec() == shape, ErrorCode::kStoreCorrupt, "shape mismatch for tensor " + name);
    auto values = from_le_bytes<float>(bytes);
    require(static_cast<std::int64_t>(values.size()) == it->second.numel(), ErrorCode::kStoreCorrupt,
            "size mismatch for tensor " + name);
    it->second.copy_(torch::from_blob(values.data(), shape, torch::kFloat32));
  }
  return out;
}

std::string checkpoint_digest(const std::filesystem::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  std::string all;
  for (const auto& entry : manifest.at("tensors")) all += entry.at("crc32").get<std::string>();
  return fnv1a_hex(all);
}

}  // namespace compgen
