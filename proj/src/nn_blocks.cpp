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

#include "compgen/nn_blocks.hpp"

#include "compgen/error.hpp"

namespace compgen {

namespace {

torch::nn::Conv2dOptions down(std::int64_t in, std::int64_t out) {
  return torch::nn::Conv2dOptions(in, out, 4).stride(2).padding(1);
}

torch::nn::ConvTranspose2dOptions up(std::int64_t in, std::int64_t out) {
  return torch::nn::ConvTranspose2dOptions(in, out, 4).stride(2).padding(1);
}

void check_geometry(int resolution, int width_multiplier) {
  require(resolution == 32 || resolution == 64, ErrorCode::kInvalidArgument,
          "network resolution must be 32 or 64");
  require(width_multiplier >= 1, ErrorCode::kInvalidArgument, "width multiplier must be >= 1");
}

}  // namespace

EncConvImpl::EncConvImpl(int channels, int resolution, int width_multiplier) {
  check_geometry(resolution, width_multiplier);
  const std::int64_t m = width_multiplier;
  c1 = register_module("c1", torch::nn::Conv2d(down(channels, 32 * m)));
  c2 = register_module("c2", torch::nn::Conv2d(down(32 * m, 64 * m)));
  c3 = register_module("c3", torch::nn::Conv2d(down(64 * m, 64 * m)));
  c4 = register_module("c4", torch::nn::Conv2d(down(64 * m, 64 * m)));
  out_channels_ = 64 * m;
  out_size_ = resolution / 16;
  out_features_ = out_channels_ * out_size_ * out_size_;
}

torch::Tensor EncConvImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(c1(x));
  h = torch::relu(c2(h));
  h = torch::relu(c3(h));
  h = torch::relu(c4(h));
  return h.flatten(1);
}

DecConvImpl::DecConvImpl(int channels, int resolution, int width_multiplier) {
  check_geometry(resolution, width_multiplier);
  const std::int64_t m = width_multiplier;
  d1 = register_module("d1", torch::nn::ConvTranspose2d(up(64 * m, 64 * m)));
  d2 = register_module("d2", torch::nn::ConvTranspose2d(up(64 * m, 64 * m)));
  d3 = register_module("d3", torch::nn::ConvTranspose2d(up(64 * m, 32 * m)));
  d4 = register_module("d4", torch::nn::ConvTranspose2d(up(32 * m, channels)));
  in_channels_ = 64 * m;
  in_size_ = resolution / 16;
}

torch::Tensor DecConvImpl::forward(const torch::Tensor& features) {
  auto h = features.view({features.size(0), in_channels_, in_size_, in_size_});
  h = torch::relu(d1(h));
  h = torch::relu(d2(h));
  h = torch::relu(d3(h));
  return d4(h);
}

MlpImpl::MlpImpl(const std::vector<std::int64_t>& widths, bool relu_last) : relu_last(relu_last) {
  require(widths.size() >= 2, ErrorCode::kInvalidArgument, "mlp needs at least one layer");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers->push_back(torch::nn::Linear(widths[i], widths[i + 1]));
  }
  register_module("layers", layers);
}

torch::Tensor MlpImpl::forward(torch::Tensor x) {
  const auto n = layers->size();
  for (std::size_t i = 0; i < n; ++i) {
    x = layers[i]->as<torch::nn::Linear>()->forward(x);
    if (i + 1 < n || relu_last) x = torch::relu(x);
  }
  return x;
}

torch::Tensor bernoulli_nll(const torch::Tensor& logits, const torch::Tensor& x) {
  require(logits.sizes() == x.sizes(), ErrorCode::kInvalidArgument,
          "bernoulli_nll: logits and targets differ in shape");
  const auto per_pixel = torch::binary_cross_entropy_with_logits(
      logits, x, {}, {}, torch::Reduction::None);
  return per_pixel.flatten(1).sum(1).mean();
}

void check_image_batch(const torch::Tensor& x, int channels, int resolution) {
  require(x.dim() == 4 && x.size(1) == channels && x.size(2) == resolution &&
              x.size(3) == resolution,
          ErrorCode::kInvalidArgument,
          "image batch must be [B, " + std::to_string(channels) + ", " +
              std::to_string(resolution) + ", " + std::to_string(resolution) + "]");
  require(x.size(0) >= 1, ErrorCode::kInvalidArgument, "empty image batch");
  require(torch::isfinite(x).all().item<bool>() && x.min().item<double>() >= 0.0 &&
              x.max().item<double>() <= 1.0,
          ErrorCode::kInvalidArgument, "image values must be finite and normalized to [0, 1]");
}

}  // namespace compgen
