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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <limits>
#include <torch/torch.h>

#include "compgen/random.hpp"

namespace compgen::testing {

// Worst relative error between backprop and centered finite differences over
// `samples` randomly chosen scalar parameters. Entries where both gradients
// are below 1e-6 (dead ReLU units) or where the loss has a kink within the
// step are redrawn; at most `samples` kinks are tolerated. Returns infinity
// when no parameter matches, too few entries could be checked, or there were
// too many kinks.
inline double gradient_check(torch::nn::Module& module, const std::function<torch::Tensor()>& loss,
                             int samples, std::uint64_t seed,
                             const std::function<bool(const std::string&)>& include = nullptr) {
  std::vector<std::pair<std::string, torch::Tensor>> params;
  for (const auto& p : module.named_parameters()) {
    if (!include || include(p.key())) params.emplace_back(p.key(), p.value());
  }
  constexpr double kFailed = std::numeric_limits<double>::infinity();
  if (params.empty()) return kFailed;
  for (auto& [name, p] : params) {
    if (p.grad().defined()) p.grad().zero_();
  }
  loss().backward();
  Rng rng(seed);
  double worst = 0.0;
  int checked = 0;
  int kinks = 0;
  for (int attempt = 0; checked < samples && attempt < 50 * samples; ++attempt) {
    auto& [name, p] = params[rng.uniform_index(params.size())];
    if (!p.grad().defined()) continue;
    const auto flat = p.data().view(-1);
    const auto k = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(flat.numel())));
    const double bp = p.grad().view(-1)[k].item<double>();
    const double orig = flat[k].item<double>();
    const double h = 1e-5;
    double plus = 0.0, minus = 0.0, center = 0.0;
    {
      torch::NoGradGuard guard;
      center = loss().item<double>();
      flat[k] = orig + h;
      plus = loss().item<double>();
      flat[k] = orig - h;
      minus = loss().item<double>();
      flat[k] = orig;
    }
    const double fd = (plus - minus) / (2 * h);
    if (std::abs(fd) < 1e-6 && std::abs(bp) < 1e-6) continue;
    const double scale = std::max({std::abs(fd), std::abs(bp), 1e-3});
    // One-sided slopes disagree: a ReLU boundary lies within +-h.
    if (std::abs((plus - center) - (center - minus)) / h > 1e-3 * scale) {
      ++kinks;
      continue;
    }
    worst = std::max(worst, std::abs(fd - bp) / scale);
    ++checked;
  }
  if (checked < samples || kinks > samples) return kFailed;
  return worst;
}

}  // namespace compgen::testing
