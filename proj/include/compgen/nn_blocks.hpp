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

#include <torch/torch.h>

namespace compgen {

/// Four 4x4 stride-2 convolutions with ReLU, widths (32, 64, 64, 64) times
/// the multiplier, flattened.
struct EncConvImpl : torch::nn::Module {
  EncConvImpl(int channels, int resolution, int width_multiplier);
  torch::Tensor forward(const torch::Tensor& x);

  std::int64_t out_features() const { return out_features_; }
  std::int64_t out_channels() const { return out_channels_; }
  int out_size() const { return out_size_; }

  torch::nn::Conv2d c1{nullptr}, c2{nullptr}, c3{nullptr}, c4{nullptr};

 private:
  std::int64_t out_channels_ = 0;
  int out_size_ = 0;
  std::int64_t out_features_ = 0;
};
TORCH_MODULE(EncConv);

/// Mirror of EncConv: unflatten, three transposed convolutions with ReLU and
/// a final transposed convolution to per-pixel logits.
struct DecConvImpl : torch::nn::Module {
  DecConvImpl(int channels, int resolution, int width_multiplier);
  torch::Tensor forward(const torch::Tensor& features);

  torch::nn::ConvTranspose2d d1{nullptr}, d2{nullptr}, d3{nullptr}, d4{nullptr};

 private:
  std::int64_t in_channels_ = 0;
  int in_size_ = 0;
};
TORCH_MODULE(DecConv);

/// Linear layers with ReLU after every layer except (optionally) the last.
struct MlpImpl : torch::nn::Module {
  MlpImpl(const std::vector<std::int64_t>& widths, bool relu_last);
  torch::Tensor forward(torch::Tensor x);

  torch::nn::ModuleList layers;
  bool relu_last = false;
};
TORCH_MODULE(Mlp);

/// Sum over pixels of the Bernoulli negative log-likelihood, mean over the
/// batch, computed from logits in log-sigmoid form.
torch::Tensor bernoulli_nll(const torch::Tensor& logits, const torch::Tensor& x);

/// Throws kInvalidArgument unless x is a finite [B, C, R, R] batch in [0, 1].
void check_image_batch(const torch::Tensor& x, int channels, int resolution);

}  // namespace compgen
